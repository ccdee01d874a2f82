#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "gammafactor/cli.hpp"

namespace gc = gammafactor::cli;

int main(int argc, char** argv) {
    CLI::App app{"Certified Gamma-factorization bounds for multilinear operators between l_p spaces"};
    app.require_subcommand(1, 1);

    gc::JobSpec job;
    std::string format = "json";
    double tol_psd = job.tol.psd;
    double tol_norm = job.tol.interval;

    auto common = [&](CLI::App* sub, bool takes_inputs) {
        if (takes_inputs) sub->add_option("-i,--input", job.inputs, "JSON input file (repeatable)")->check(CLI::ExistingFile);
        sub->add_option("--seed", job.seed, "random seed")->capture_default_str();
        sub->add_option("--budget", job.budget, "search budget (restarts / proposals)")->capture_default_str();
        sub->add_option("--tol-psd", tol_psd, "domination PSD tolerance")->capture_default_str();
        sub->add_option("--tol-norm", tol_norm, "interval consistency tolerance")->capture_default_str();
        sub->add_option("-o,--output", job.output, "report path (default stdout)");
        sub->add_option("--format", format, "json or table")->check(CLI::IsMember({"json", "table"}))->capture_default_str();
        sub->add_flag("--timing", job.timing, "record wall time in the report");
    };

    const std::pair<const char*, const char*> subs[] = {
        {"norms", "injective / projective / operator norm intervals"},
        {"certify", "certified Gamma interval for an operator, optionally with a supplied witness"},
        {"search-witness", "search for a Kwapien witness"},
        {"gamma", "gamma tensor norm interval"},
        {"poly", "Gamma interval for a homogeneous polynomial"},
    };
    for (const auto& [name, help] : subs) common(app.add_subcommand(name, help), true);
    CLI::App* demo = app.add_subcommand("demo", "run a self-checking preset");
    demo->add_option("preset", job.preset, "preset name")->required();
    common(demo, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : gc::kInputError;
    }
    job.command = app.get_subcommands().front()->get_name();
    job.format = format == "table" ? gc::Format::table : gc::Format::json;
    job.tol.psd = tol_psd;
    job.tol.interval = tol_norm;
    return gc::execute(job);
}
