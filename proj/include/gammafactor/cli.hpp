#pragma once

// Batch job runner behind tools/gammafactor: loads JSON inputs, runs one
// command and assembles the report.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gammafactor/json_io.hpp"
#include "gammafactor/scenarios.hpp"

namespace gammafactor::cli {

inline constexpr const char* kReportVersion = "gammafactor-report/1";

enum class Format { json, table };

struct JobSpec {
    std::string command;
    std::string preset;  // demo only
    std::vector<std::string> inputs;
    std::uint64_t seed = 1;
    int budget = 64;
    Tolerances tol = default_tolerances();
    std::string output;  // empty: stdout
    Format format = Format::json;
    bool timing = false;
};

enum ExitCode { kOk = 0, kFailed = 1, kInputError = 2, kRefused = 3 };

struct RunResult {
    Json report;
    int exit_code = kOk;
};

inline const std::set<std::string>& commands() {
    static const std::set<std::string> c{"norms", "certify", "search-witness", "gamma", "poly", "demo"};
    return c;
}

inline const std::set<std::string>& input_keys() {
    static const std::set<std::string> k{"tensor",         "pair",       "operator",  "witness",
                                         "representation", "gamma",      "polynomial", "poly_witness"};
    return k;
}

// Top-level objects of every input file merged into one; a key may appear
// in only one file.
inline Json load_inputs(const std::vector<std::string>& files) {
    Json merged = Json::object();
    for (const auto& f : files) {
        const Json doc = io::load_file(f);
        if (!doc.is_object()) throw SchemaError(f, "top level must be an object");
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            if (!input_keys().count(it.key())) throw SchemaError(f + ":" + it.key(), "unknown input key");
            if (merged.contains(it.key())) throw SchemaError(f + ":" + it.key(), "key already given by another input");
            merged[it.key()] = it.value();
        }
    }
    return merged;
}

inline Json tolerances_json(const Tolerances& t) {
    Json j;
    j["psd"] = io::num(t.psd);
    j["interval"] = io::num(t.interval);
    j["eig_offdiag"] = io::num(t.eig_offdiag);
    j["eig_max_sweeps"] = t.eig_max_sweeps;
    j["svd_orthogonality"] = io::num(t.svd_orthogonality);
    j["svd_max_sweeps"] = t.svd_max_sweeps;
    j["gradient_step"] = io::num(t.gradient_step);
    j["local_iterations"] = t.local_iterations;
    j["max_vertex_combinations"] = t.max_vertex_combinations;
    j["max_dual_restarts"] = t.max_dual_restarts;
    j["max_vertex_dim"] = t.max_vertex_dim;
    j["max_embedding_check_dim"] = t.max_embedding_check_dim;
    return j;
}

inline Json checks_json(const std::vector<scenarios::Check>& checks) {
    Json a = Json::array();
    for (const auto& c : checks) {
        Json j;
        j["name"] = c.name;
        j["lhs"] = io::num(c.lhs);
        j["rhs"] = io::num(c.rhs);
        j["pass"] = c.pass;
        a.push_back(j);
    }
    return a;
}

namespace detail {

struct Refusal {
    std::string message;
};

inline const Json& require(const Json& in, const std::string& key, const std::string& command) {
    if (!in.contains(key)) throw SchemaError("inputs", "command '" + command + "' needs an input with key '" + key + "'");
    return in[key];
}

inline Json run_norms(const JobSpec& job, const Json& in) {
    Json r = Json::object();
    if (!in.contains("tensor") && !in.contains("pair") && !in.contains("operator"))
        throw SchemaError("inputs", "command 'norms' needs one of 'tensor', 'pair', 'operator'");
    if (in.contains("tensor")) {
        const DenseTensor u = io::tensor(in["tensor"], "tensor");
        Json j;
        j["injective"] = io::interval_json(injective_norm_bounds(u, job.budget, job.seed, job.tol));
        j["projective"] = io::interval_json(projective_norm_bounds(u, job.budget, job.seed, job.tol));
        if (std::all_of(u.spaces().begin(), u.spaces().end(), [](const SpaceSpec& s) { return s.is_euclidean(); }))
            j["hilbert"] = io::num(hilbert_crossnorm(u));
        r["tensor"] = j;
    }
    if (in.contains("pair")) {
        const Json& pj = in["pair"];
        const auto sp = io::spaces(io::field(pj, "spaces", "pair"), "pair.spaces");
        const DecomposablePoint p = io::point(io::field(pj, "p", "pair"), sp, "pair.p");
        const DecomposablePoint q = io::point(io::field(pj, "q", "pair"), sp, "pair.q");
        r["pi_distance"] = io::interval_json(pi_distance_bounds(sp, p, q, job.budget, job.seed, job.tol));
    }
    if (in.contains("operator")) {
        const MultilinearOperator t = io::operator_(in["operator"], "operator");
        Json j;
        j["operator_norm"] = io::interval_json(operator_norm_bounds(t, job.budget, job.seed, job.tol));
        if (std::all_of(t.domain().begin(), t.domain().end(), [](const SpaceSpec& s) { return s.is_euclidean(); }))
            j["hs_norm"] = io::num(hs_norm(t));
        r["operator"] = j;
    }
    return r;
}

inline Json run_certify(const JobSpec& job, const Json& in, std::optional<Refusal>& refusal) {
    const MultilinearOperator t = io::operator_(require(in, "operator", job.command), "operator");
    const WitnessSearchOptions opts{env_thread_cap()};
    CertifiedInterval iv = gamma_interval(t, job.seed, job.budget, opts, job.tol);
    Json r = Json::object();
    if (in.contains("witness")) {
        const KwapienWitness w = io::witness(in["witness"], t.domain(), "witness");
        try {
            const GammaCertificate c = lower_bound_from_witness(t, w, 4, job.tol);
            r["supplied_witness"] = io::certificate_json(c);
            if (c.value > iv.lower) {
                iv.lower = c.value;
                iv.lower_cert = c;
            }
            if (!iv.consistent(job.tol.interval))
                throw InconsistencyError("certify: supplied witness lower bound exceeds the certified upper bound");
        } catch (const RefusedError& e) {
            refusal = Refusal{e.what()};
            r["supplied_witness"] = nullptr;
        }
    }
    r["gamma"] = io::certified_interval_json(iv);
    if (!iv.upper_finite() && !refusal) refusal = Refusal{"no upper-bound route applies to this operator"};
    return r;
}

inline Json run_search_witness(const JobSpec& job, const Json& in) {
    const MultilinearOperator t = io::operator_(require(in, "operator", job.command), "operator");
    const WitnessSearchResult ws = search_witness(t, job.seed, job.budget, WitnessSearchOptions{env_thread_cap()}, job.tol);
    Json r;
    r["witness_lower"] = io::certificate_json(ws.cert);
    r["witness"] = io::witness_json(ws.witness);
    return r;
}

inline Json run_gamma(const JobSpec& job, const Json& in) {
    Json r = Json::object();
    if (!in.contains("gamma") && !in.contains("representation"))
        throw SchemaError("inputs", "command 'gamma' needs 'gamma' (a tensor) or 'representation'");
    if (in.contains("gamma") && in.contains("representation"))
        throw SchemaError("inputs", "give either 'gamma' or 'representation', not both");
    GammaInterval gi;
    if (in.contains("representation")) {
        gi.representation = io::representation(in["representation"], "representation");
        gi.upper_bound = gamma_upper(gi.representation, job.budget, job.tol);
        gi.upper = gi.upper_bound.value;
        const DenseTensor u = assemble(gi.representation);
        gi.lower_bound = gamma_lower_elementary(u, gi.representation.spaces, gi.representation.codomain, job.budget,
                                                job.seed, job.tol);
        gi.lower = gi.lower_bound.value;
    } else {
        const Json& g = in["gamma"];
        const auto sp = io::spaces(io::field(g, "spaces", "gamma"), "gamma.spaces");
        const Codomain y = io::codomain(io::field(g, "codomain", "gamma"), "gamma.codomain");
        std::vector<SpaceSpec> full = sp;
        full.push_back(y.space());
        std::vector<std::size_t> shape;
        for (const auto& s : full) shape.push_back(s.dim);
        const DenseTensor u(full, io::coeffs(io::field(g, "coeffs", "gamma"), shape, "gamma.coeffs"));
        gi = gamma_bounds(u, sp, y, job.budget, job.seed, job.tol);
    }
    if (in.contains("operator")) {
        const MultilinearOperator t = io::operator_(in["operator"], "operator");
        const CertifiedInterval gt = gamma_interval(t, job.seed, job.budget, WitnessSearchOptions{env_thread_cap()}, job.tol);
        if (gt.upper_finite()) {
            const GammaBound via = gamma_lower_via_operator(assemble(gi.representation), t, gt.upper);
            r["operator_lower"] = io::gamma_bound_json(via);
            if (via.value > gi.lower) {
                gi.lower = via.value;
                gi.lower_bound = via;
            }
        }
    }
    if (gi.lower > gi.upper + job.tol.interval * (1.0 + gi.upper))
        throw InconsistencyError("gamma: lower bound exceeds upper bound");
    Json j;
    j["lower"] = io::num(gi.lower);
    j["upper"] = io::num(gi.upper);
    j["lower_certificate"] = io::gamma_bound_json(gi.lower_bound);
    j["upper_certificate"] = io::gamma_bound_json(gi.upper_bound);
    j["terms"] = gi.representation.terms.size();
    r["gamma_norm"] = j;
    return r;
}

inline Json run_poly(const JobSpec& job, const Json& in, std::optional<Refusal>& refusal) {
    const HomogeneousPolynomial p = io::polynomial(require(in, "polynomial", job.command), "polynomial");
    PolyInterval iv = poly_gamma_interval(p, job.seed, job.budget, WitnessSearchOptions{env_thread_cap()}, job.tol);
    Json r = Json::object();
    if (in.contains("poly_witness")) {
        const PolyWitness w = io::poly_witness(in["poly_witness"], p.space(), "poly_witness");
        try {
            const GammaCertificate c = poly_lower_bound(p, w, 4, job.tol);
            r["supplied_witness"] = io::certificate_json(c);
            if (c.value > iv.lower) {
                iv.lower = c.value;
                iv.lower_cert = c;
                iv.witness = w;
            }
        } catch (const RefusedError& e) {
            refusal = Refusal{e.what()};
            r["supplied_witness"] = nullptr;
        }
    }
    Json j;
    j["lower"] = io::num(iv.lower);
    j["upper"] = io::num(iv.upper);
    j["lower_certificate"] = io::certificate_json(iv.lower_cert);
    j["upper_certificate"] =
        iv.operator_interval.upper_cert ? io::certificate_json(*iv.operator_interval.upper_cert) : Json(nullptr);
    j["witness"] = io::poly_witness_json(iv.witness);
    j["operator_gamma"] = io::certified_interval_json(iv.operator_interval);
    r["polynomial_gamma"] = j;
    if (!std::isfinite(iv.upper) && !refusal) refusal = Refusal{"no upper-bound route applies to T_P"};
    return r;
}

}  // namespace detail

// Runs one job. Never throws; failures become a status and an exit code.
inline RunResult run(const JobSpec& job) {
    RunResult out;
    Json& rep = out.report;
    rep["version"] = kReportVersion;
    rep["command"] = job.command;
    if (job.command == "demo") rep["preset"] = job.preset;
    rep["seed"] = job.seed;
    rep["budget"] = job.budget;
    rep["tolerances"] = tolerances_json(job.tol);
    rep["inputs"] = job.inputs;
    rep["status"] = "ok";
    rep["results"] = Json::object();
    rep["checks"] = Json::array();

    auto fail = [&](const char* status, int code, const std::string& msg) {
        rep["status"] = status;
        rep["message"] = msg;
        out.exit_code = code;
    };
    try {
        if (!commands().count(job.command)) throw SchemaError("command", "unknown command '" + job.command + "'");
        if (job.budget < 1) throw SchemaError("budget", "must be >= 1");
        std::optional<detail::Refusal> refusal;
        if (job.command == "demo") {
            const auto& ps = scenarios::presets();
            const auto it = ps.find(job.preset);
            if (it == ps.end()) throw SchemaError("preset", "unknown preset '" + job.preset + "'");
            if (!job.inputs.empty()) throw SchemaError("inputs", "demo takes no input files");
            const scenarios::Outcome o =
                it->second(scenarios::Context{job.seed, job.budget, job.tol, WitnessSearchOptions{env_thread_cap()}});
            rep["results"] = o.results;
            rep["checks"] = checks_json(o.checks);
            if (!o.passed()) fail("failed", kFailed, "one or more checks failed");
            return out;
        }
        const Json in = load_inputs(job.inputs);
        if (job.command == "norms") rep["results"] = detail::run_norms(job, in);
        else if (job.command == "certify") rep["results"] = detail::run_certify(job, in, refusal);
        else if (job.command == "search-witness") rep["results"] = detail::run_search_witness(job, in);
        else if (job.command == "gamma") rep["results"] = detail::run_gamma(job, in);
        else rep["results"] = detail::run_poly(job, in, refusal);
        if (refusal) fail("refused", kRefused, refusal->message);
    } catch (const InputError& e) {
        fail("input-error", kInputError, e.what());
    } catch (const RefusedError& e) {
        fail("refused", kRefused, e.what());
    } catch (const UnsupportedError& e) {
        fail("refused", kRefused, e.what());
    } catch (const BudgetError& e) {
        fail("refused", kRefused, e.what());
    } catch (const SearchError& e) {
        fail("refused", kRefused, e.what());
    } catch (const std::exception& e) {
        fail("error", kFailed, e.what());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Table rendering
// ---------------------------------------------------------------------------

namespace detail {

inline std::string cell(const Json& v) {
    if (v.is_number_float()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.10g", v.get<double>());
        return buf;
    }
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

inline std::string route_of(const Json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_object()) return "";
    const Json& c = j[key];
    if (c.contains("kind")) return cell(c["kind"]);
    if (c.contains("route")) return cell(c["route"]);
    return "";
}

inline void table_rows(const Json& j, const std::string& path, std::ostream& os) {
    if (!j.is_object()) return;
    if (j.contains("lower") && j.contains("upper")) {
        os << "  " << path << "  [" << cell(j["lower"]) << ", " << cell(j["upper"]) << "]";
        const std::string lo = route_of(j, "lower_certificate"), up = route_of(j, "upper_certificate");
        if (!lo.empty() || !up.empty()) os << "  (" << lo << " / " << up << ")";
        os << "\n";
    } else if (j.contains("value") && j.contains("kind")) {
        os << "  " << path << "  " << cell(j["value"]) << "  (" << cell(j["kind"]) << ")\n";
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "lower_certificate" || it.key() == "upper_certificate" || it.key() == "upper_candidates") continue;
        if (it.value().is_object()) table_rows(it.value(), path.empty() ? it.key() : path + "." + it.key(), os);
        if (it.value().is_array() && it.key() == "cases")
            for (std::size_t i = 0; i < it.value().size(); ++i)
                table_rows(it.value()[i], path + ".cases[" + std::to_string(i) + "]", os);
    }
}

}  // namespace detail

inline std::string render_table(const Json& rep) {
    std::ostringstream os;
    os << rep["command"].get<std::string>();
    if (rep.contains("preset")) os << " " << rep["preset"].get<std::string>();
    os << "  seed " << rep["seed"].dump() << "  budget " << rep["budget"].dump() << "  status "
       << rep["status"].get<std::string>() << "\n";
    if (rep.contains("message")) os << "  " << rep["message"].get<std::string>() << "\n";
    detail::table_rows(rep["results"], "", os);
    for (const auto& c : rep["checks"])
        os << (c["pass"].get<bool>() ? "PASS  " : "FAIL  ") << c["name"].get<std::string>() << "  (" << detail::cell(c["lhs"])
           << " <= " << detail::cell(c["rhs"]) << ")\n";
    if (rep.contains("wall_time_seconds")) os << "  wall time " << detail::cell(rep["wall_time_seconds"]) << " s\n";
    return os.str();
}

// Runs the job and writes the report; returns the process exit code.
inline int execute(const JobSpec& job) {
    const auto t0 = std::chrono::steady_clock::now();
    RunResult r = run(job);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (job.timing) r.report["wall_time_seconds"] = secs;
    if (r.report.contains("message")) std::cerr << "gammafactor: " << r.report["message"].get<std::string>() << "\n";
    std::cerr << "gammafactor: wall time " << secs << " s\n";

    const std::string text = job.format == Format::json ? io::serialize(r.report) : render_table(r.report);
    if (job.output.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(job.output, std::ios::binary);
        if (!f) {
            std::cerr << "gammafactor: cannot write " << job.output << "\n";
            return kInputError;
        }
        f << text;
    }
    return r.exit_code;
}

}  // namespace gammafactor::cli
