#pragma once

// JSON input parsing with path-qualified diagnostics, and the report
// serializer (17 significant digits, infinity as "inf").

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gammafactor/certificates.hpp"
#include "gammafactor/errors.hpp"
#include "gammafactor/gamma_norm.hpp"
#include "gammafactor/operators.hpp"
#include "gammafactor/polynomials.hpp"
#include "gammafactor/spaces.hpp"
#include "gammafactor/tensor.hpp"

namespace gammafactor {

using Json = nlohmann::ordered_json;

// Input that does not match the expected schema; `path` locates the field.
class SchemaError : public InputError {
public:
    SchemaError(const std::string& path, const std::string& what)
        : InputError(path + ": " + what), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

namespace io {

inline const Json& field(const Json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) throw SchemaError(path, "missing field '" + key + "'");
    return *it;
}

inline double number(const Json& j, const std::string& path) {
    if (!j.is_number()) throw SchemaError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw SchemaError(path, "non-finite number");
    return v;
}

inline std::size_t positive_int(const Json& j, const std::string& path) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) throw SchemaError(path, "expected an integer");
    const auto v = j.get<long long>();
    if (v < 1) throw SchemaError(path, "expected an integer >= 1");
    return static_cast<std::size_t>(v);
}

inline Exponent exponent(const Json& j, const std::string& path) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "infinity") return Exponent::infinity();
        const auto slash = s.find('/');
        if (slash != std::string::npos) {
            try {
                return Exponent::rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
            } catch (const std::exception&) {
            }
        }
        throw SchemaError(path, "expected a number >= 1, a fraction \"a/b\" or \"inf\"");
    }
    const double p = number(j, path);
    if (p < 1.0) throw SchemaError(path, "exponent must be >= 1");
    try {
        return Exponent::from_double(p);
    } catch (const InputError& e) {
        throw SchemaError(path, e.what());
    }
}

inline SpaceSpec space(const Json& j, const std::string& path) {
    return SpaceSpec(positive_int(field(j, "dim", path), path + ".dim"), exponent(field(j, "p", path), path + ".p"));
}

inline std::vector<SpaceSpec> spaces(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw SchemaError(path, "expected a nonempty array of spaces");
    std::vector<SpaceSpec> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(space(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline Vector vector(const Json& j, std::size_t dim, const std::string& path) {
    if (!j.is_array()) throw SchemaError(path, "expected an array of numbers");
    if (j.size() != dim) throw SchemaError(path, "expected " + std::to_string(dim) + " entries, got " + std::to_string(j.size()));
    Vector v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return v;
}

// Nested arrays of the given shape, flattened row-major.
inline void nested(const Json& j, const std::vector<std::size_t>& shape, std::size_t level, const std::string& path, Vector& out) {
    if (level == shape.size()) {
        out.push_back(number(j, path));
        return;
    }
    if (!j.is_array()) throw SchemaError(path, "expected a nested array");
    if (j.size() != shape[level])
        throw SchemaError(path, "expected " + std::to_string(shape[level]) + " entries, got " + std::to_string(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) nested(j[i], shape, level + 1, path + "[" + std::to_string(i) + "]", out);
}

inline Vector coeffs(const Json& j, const std::vector<std::size_t>& shape, const std::string& path) {
    Vector out;
    nested(j, shape, 0, path, out);
    return out;
}

inline DenseTensor tensor(const Json& j, const std::string& path) {
    auto sp = spaces(field(j, "spaces", path), path + ".spaces");
    std::vector<std::size_t> shape;
    for (const auto& s : sp) shape.push_back(s.dim);
    return DenseTensor(sp, coeffs(field(j, "coeffs", path), shape, path + ".coeffs"));
}

inline DecomposablePoint point(const Json& j, const std::vector<SpaceSpec>& sp, const std::string& path) {
    const Json& f = field(j, "factors", path);
    if (!f.is_array() || f.size() != sp.size())
        throw SchemaError(path + ".factors", "expected " + std::to_string(sp.size()) + " factors");
    DecomposablePoint p;
    for (std::size_t k = 0; k < sp.size(); ++k)
        p.factors.push_back(vector(f[k], sp[k].dim, path + ".factors[" + std::to_string(k) + "]"));
    return p;
}

inline std::vector<PointPair> pairs(const Json& j, const std::vector<SpaceSpec>& sp, const std::string& path) {
    if (!j.is_array()) throw SchemaError(path, "expected an array of point pairs");
    std::vector<PointPair> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string pi = path + "[" + std::to_string(i) + "]";
        if (!j[i].is_array() || j[i].size() != 2) throw SchemaError(pi, "expected a pair [point, point]");
        out.push_back(PointPair{point(j[i][0], sp, pi + "[0]"), point(j[i][1], sp, pi + "[1]")});
    }
    return out;
}

inline Codomain codomain(const Json& j, const std::string& path) {
    if (j.is_object() && j.contains("tensor")) {
        auto f = spaces(j["tensor"], path + ".tensor");
        const std::string tag = j.contains("norm") ? j["norm"].get<std::string>() : "pi";
        try {
            return Codomain::tensor(std::move(f), cross_norm_from_string(tag));
        } catch (const InputError& e) {
            throw SchemaError(path, e.what());
        }
    }
    return Codomain(space(j, path));
}

inline MultilinearOperator operator_(const Json& j, const std::string& path) {
    auto dom = spaces(field(j, "domain", path), path + ".domain");
    Codomain cod = codomain(field(j, "codomain", path), path + ".codomain");
    std::vector<std::size_t> shape;
    for (const auto& s : dom) shape.push_back(s.dim);
    shape.push_back(cod.dim());
    return MultilinearOperator(dom, cod, coeffs(field(j, "coeffs", path), shape, path + ".coeffs"));
}

inline KwapienWitness witness(const Json& j, const std::vector<SpaceSpec>& sp, const std::string& path) {
    KwapienWitness w;
    w.spaces = sp;
    w.xz = pairs(field(j, "xz", path), sp, path + ".xz");
    w.st = pairs(field(j, "st", path), sp, path + ".st");
    if (w.st.empty()) throw SchemaError(path + ".st", "must be nonempty");
    return w;
}

inline GammaRepresentation representation(const Json& j, const std::string& path) {
    GammaRepresentation rep;
    rep.spaces = spaces(field(j, "spaces", path), path + ".spaces");
    rep.codomain = codomain(field(j, "codomain", path), path + ".codomain");
    const Json& terms = field(j, "terms", path);
    if (!terms.is_array() || terms.empty()) throw SchemaError(path + ".terms", "expected a nonempty array");
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string pi = path + ".terms[" + std::to_string(i) + "]";
        rep.terms.push_back(GammaTerm{point(field(terms[i], "p", pi), rep.spaces, pi + ".p"),
                                      point(field(terms[i], "q", pi), rep.spaces, pi + ".q"),
                                      vector(field(terms[i], "y", pi), rep.codomain.dim(), pi + ".y")});
    }
    if (j.contains("dominators")) {
        rep.dominators = pairs(j["dominators"], rep.spaces, path + ".dominators");
    } else {
        for (const auto& t : rep.terms) rep.dominators.push_back(PointPair{t.p, t.q});
    }
    rep.pad();
    return rep;
}

inline HomogeneousPolynomial polynomial(const Json& j, const std::string& path) {
    const std::size_t degree = positive_int(field(j, "degree", path), path + ".degree");
    const SpaceSpec x = space(field(j, "space", path), path + ".space");
    const SpaceSpec y = space(field(j, "codomain", path), path + ".codomain");
    std::vector<std::size_t> shape(degree, x.dim);
    shape.push_back(y.dim);
    Vector c = coeffs(field(j, "coeffs", path), shape, path + ".coeffs");
    std::vector<SpaceSpec> all(degree, x);
    all.push_back(y);
    const DenseTensor t(all, c);
    const double scale = std::max(1.0, t.frobenius());
    if (detail::asymmetry(t, degree) > 1e-12 * scale)
        throw SchemaError(path + ".coeffs", "coefficients are not symmetric in the domain indices");
    return HomogeneousPolynomial(degree, x, y, std::move(c));
}

inline PolyWitness poly_witness(const Json& j, const SpaceSpec& x, const std::string& path) {
    auto vp = [&](const Json& arr, const std::string& p) {
        if (!arr.is_array()) throw SchemaError(p, "expected an array of vector pairs");
        std::vector<VectorPair> out;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string pi = p + "[" + std::to_string(i) + "]";
            if (!arr[i].is_array() || arr[i].size() != 2) throw SchemaError(pi, "expected a pair [vector, vector]");
            out.push_back(VectorPair{vector(arr[i][0], x.dim, pi + "[0]"), vector(arr[i][1], x.dim, pi + "[1]")});
        }
        return out;
    };
    PolyWitness w{vp(field(j, "xz", path), path + ".xz"), vp(field(j, "st", path), path + ".st")};
    if (w.st.empty()) throw SchemaError(path + ".st", "must be nonempty");
    return w;
}

inline Json load_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw SchemaError(file, "cannot open input file");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(file, std::string("malformed JSON: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

inline Json num(double v) {
    if (std::isinf(v)) return v > 0 ? Json("inf") : Json("-inf");
    if (std::isnan(v)) return Json("nan");
    return Json(v);
}

inline Json vec(const Vector& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

inline Json space_json(const SpaceSpec& s) {
    Json j;
    j["dim"] = s.dim;
    if (s.p.is_infinite()) j["p"] = "inf";
    else if (s.p.denominator() == 1) j["p"] = s.p.numerator();
    else j["p"] = s.p.to_string();
    return j;
}

inline Json spaces_json(const std::vector<SpaceSpec>& sp) {
    Json a = Json::array();
    for (const auto& s : sp) a.push_back(space_json(s));
    return a;
}

inline Json codomain_json(const Codomain& c) {
    if (!c.is_tensor()) return space_json(c.space());
    Json j;
    j["tensor"] = spaces_json(c.factors());
    j["norm"] = to_string(c.cross_norm());
    return j;
}

inline Json point_json(const DecomposablePoint& p) {
    Json f = Json::array();
    for (const auto& v : p.factors) f.push_back(vec(v));
    Json j;
    j["factors"] = f;
    return j;
}

inline Json pairs_json(const std::vector<PointPair>& ps) {
    Json a = Json::array();
    for (const auto& pr : ps) a.push_back(Json::array({point_json(pr.first), point_json(pr.second)}));
    return a;
}

inline Json witness_json(const KwapienWitness& w) {
    Json j;
    j["xz"] = pairs_json(w.xz);
    j["st"] = pairs_json(w.st);
    return j;
}

inline Json poly_witness_json(const PolyWitness& w) {
    auto vp = [](const std::vector<VectorPair>& ps) {
        Json a = Json::array();
        for (const auto& pr : ps) a.push_back(Json::array({vec(pr.first), vec(pr.second)}));
        return a;
    };
    Json j;
    j["xz"] = vp(w.xz);
    j["st"] = vp(w.st);
    return j;
}

inline Json provenance_json(const Provenance& p) {
    Json j;
    j["route"] = p.route;
    j["detail"] = p.detail;
    Json vs = Json::array();
    for (const auto& v : p.vectors) vs.push_back(vec(v));
    j["vectors"] = vs;
    Json parts = Json::array();
    for (const auto& q : p.parts) parts.push_back(provenance_json(q));
    j["parts"] = parts;
    return j;
}

inline Json interval_json(const NormInterval& iv) {
    Json j;
    j["lower"] = num(iv.lower);
    j["upper"] = num(iv.upper);
    j["lower_certificate"] = provenance_json(iv.lower_certificate);
    j["upper_certificate"] = provenance_json(iv.upper_certificate);
    return j;
}

inline Json certificate_json(const GammaCertificate& c) {
    Json j;
    j["kind"] = to_string(c.kind);
    j["value"] = num(c.value);
    j["detail"] = c.detail;
    Json nums = Json::object();
    for (const auto& [k, v] : c.numbers) nums[k] = num(v);
    j["numbers"] = nums;
    if (c.witness) j["witness"] = witness_json(*c.witness);
    Json norms = Json::array();
    for (const auto& p : c.norm_certificates) norms.push_back(provenance_json(p));
    j["norm_certificates"] = norms;
    Json parts = Json::array();
    for (const auto& p : c.parts) parts.push_back(certificate_json(p));
    j["parts"] = parts;
    return j;
}

inline Json certified_interval_json(const CertifiedInterval& iv) {
    Json j;
    j["lower"] = num(iv.lower);
    j["upper"] = num(iv.upper);
    j["lower_certificate"] = certificate_json(iv.lower_cert);
    j["upper_certificate"] = iv.upper_cert ? certificate_json(*iv.upper_cert) : Json(nullptr);
    Json all = Json::array();
    for (const auto& c : iv.candidates) all.push_back(certificate_json(c));
    j["upper_candidates"] = all;
    return j;
}

inline Json gamma_bound_json(const GammaBound& g) {
    Json j;
    j["value"] = num(g.value);
    j["route"] = g.route;
    Json nums = Json::object();
    for (const auto& [k, v] : g.numbers) nums[k] = num(v);
    j["numbers"] = nums;
    Json certs = Json::array();
    for (const auto& p : g.certificates) certs.push_back(provenance_json(p));
    j["certificates"] = certs;
    return j;
}

inline void format_number(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

inline void dump(const Json& j, std::string& out, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad + Json(it.key()).dump() + ": ";
                dump(it.value(), out, indent, depth + 1);
            }
            out += "\n" + close + "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            // Arrays of scalars stay on one line.
            const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
            if (flat) {
                out += "[";
                for (std::size_t i = 0; i < j.size(); ++i) {
                    if (i) out += ", ";
                    dump(j[i], out, indent, depth + 1);
                }
                out += "]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ",\n";
                out += pad;
                dump(j[i], out, indent, depth + 1);
            }
            out += "\n" + close + "]";
            return;
        }
        case Json::value_t::number_float: format_number(out, j.get<double>()); return;
        default: out += j.dump(); return;
    }
}

inline std::string serialize(const Json& j) {
    std::string out;
    dump(j, out, 2, 0);
    out += "\n";
    return out;
}

}  // namespace io
}  // namespace gammafactor
