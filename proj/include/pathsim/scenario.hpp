#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pathsim/errors.hpp"
#include "pathsim/hilbert.hpp"

namespace pathsim {

enum class FunctionalKind { indicator, projector, observable_at, two_time_difference, table };

inline const char* to_string(FunctionalKind k) {
    switch (k) {
        case FunctionalKind::indicator: return "indicator";
        case FunctionalKind::projector: return "projector";
        case FunctionalKind::observable_at: return "observable_at";
        case FunctionalKind::two_time_difference: return "two_time_difference";
        case FunctionalKind::table: return "table";
    }
    return "?";
}

/// Declarative description of a path functional; resolved against an
/// enumerated PathwaySet by the pathways module. Only the fields relevant
/// to `kind` are meaningful.
struct FunctionalSpec {
    FunctionalKind kind = FunctionalKind::table;
    std::vector<std::size_t> paths;  // indicator
    std::string slice;               // projector, observable_at
    int index = -1;                  // projector
    std::string observable;          // observable_at, two_time_difference
    std::string slice_a;             // two_time_difference (earlier slice)
    std::string slice_b;             // two_time_difference (later slice)
    std::vector<double> values;      // table

    static FunctionalSpec indicator_of(std::vector<std::size_t> path_indices) {
        FunctionalSpec f;
        f.kind = FunctionalKind::indicator;
        f.paths = std::move(path_indices);
        return f;
    }
    static FunctionalSpec projector_at(std::string slice_label, int basis_index) {
        FunctionalSpec f;
        f.kind = FunctionalKind::projector;
        f.slice = std::move(slice_label);
        f.index = basis_index;
        return f;
    }
    static FunctionalSpec observable_at(std::string slice_label, std::string observable_name) {
        FunctionalSpec f;
        f.kind = FunctionalKind::observable_at;
        f.slice = std::move(slice_label);
        f.observable = std::move(observable_name);
        return f;
    }
    static FunctionalSpec difference(std::string earlier, std::string later, std::string observable_name) {
        FunctionalSpec f;
        f.kind = FunctionalKind::two_time_difference;
        f.slice_a = std::move(earlier);
        f.slice_b = std::move(later);
        f.observable = std::move(observable_name);
        return f;
    }
    static FunctionalSpec table_of(std::vector<double> vals) {
        FunctionalSpec f;
        f.kind = FunctionalKind::table;
        f.values = std::move(vals);
        return f;
    }
};

/// A full problem statement: boundary states, per-segment evolution,
/// intermediate slice bases, plus named observables, functionals and meter
/// placements. Structurally well-formed by construction; semantic
/// invariants are checked by validate().
struct ScenarioSpec {
    std::string name;
    int dim = 0;
    StateVector psi_initial;
    StateVector psi_final;
    std::vector<LinearOperator> segments;  // length = slices.size() + 1
    std::vector<SliceBasis> slices;
    std::map<std::string, LinearOperator> observables;
    std::map<std::string, FunctionalSpec> functionals;
    std::map<std::string, std::string> meters;  // meter label -> functional name
};

inline int slice_position(const ScenarioSpec& spec, const std::string& label) {
    for (std::size_t i = 0; i < spec.slices.size(); ++i)
        if (spec.slices[i].time_label == label) return static_cast<int>(i);
    return -1;
}

/// Number of virtual paths, Π over slices of basis size (1 when no slices).
inline std::size_t path_count(const ScenarioSpec& spec) {
    std::size_t n = 1;
    for (const auto& s : spec.slices) {
        if (s.basis.empty()) return 0;
        n *= s.basis.size();
    }
    return n;
}

namespace detail {

struct DiagonalCheck {
    bool ok = false;
    int bad_index = -1;
    double defect = 0.0;
    std::vector<double> values;
};

/// Eigenvalue of `obs` on each slice basis vector, verifying that each
/// basis vector actually is an eigenvector (residual below tol).
inline DiagonalCheck observable_on_slice(const LinearOperator& obs, const SliceBasis& slice, double tol = 1e-8) {
    DiagonalCheck out;
    for (std::size_t j = 0; j < slice.basis.size(); ++j) {
        const StateVector& b = slice.basis[j];
        if (b.dim() != obs.dim()) {
            out.bad_index = static_cast<int>(j);
            return out;
        }
        const StateVector bb = apply(obs, b);
        const double mu = inner_product(b, bb).real();
        double residual = 0.0;
        for (int i = 0; i < b.dim(); ++i) residual = std::max(residual, std::abs(bb[i] - mu * b[i]));
        if (residual > tol) {
            out.bad_index = static_cast<int>(j);
            out.defect = residual;
            return out;
        }
        out.values.push_back(mu);
    }
    out.ok = true;
    return out;
}

}  // namespace detail

/// Semantic validation. Empty result means every invariant holds; each
/// entry carries a stable machine-readable code.
inline std::vector<Diagnostic> validate(const ScenarioSpec& spec) {
    std::vector<Diagnostic> diags;
    auto fail = [&diags](std::string code, std::string loc, std::string msg) {
        diags.push_back(Diagnostic{std::move(code), std::move(msg), std::move(loc)});
    };

    if (spec.dim <= 0) {
        fail("dimension_mismatch", "$.dim", "dimension must be a positive integer");
        return diags;
    }
    if (spec.dim > defaults::max_dim)
        fail("dimension_cap", "$.dim", "dimension " + std::to_string(spec.dim) + " exceeds cap " + std::to_string(defaults::max_dim));
    if (spec.slices.size() > static_cast<std::size_t>(defaults::max_slices))
        fail("slice_cap", "$.slices", "slice count " + std::to_string(spec.slices.size()) + " exceeds cap " + std::to_string(defaults::max_slices));
    if (spec.segments.size() != spec.slices.size() + 1)
        fail("dimension_mismatch", "$.segments",
             "expected " + std::to_string(spec.slices.size() + 1) + " segments for " + std::to_string(spec.slices.size()) +
                 " slices, got " + std::to_string(spec.segments.size()));

    auto check_boundary = [&](const StateVector& psi, const char* loc) {
        if (psi.dim() != spec.dim) {
            fail("dimension_mismatch", loc, "boundary state has dim " + std::to_string(psi.dim()));
            return;
        }
        const double n2 = psi.norm2();
        if (std::abs(n2 - 1.0) > defaults::boundary_norm_tol)
            fail("unnormalized_boundary_state", loc, "norm^2 = " + std::to_string(n2));
    };
    check_boundary(spec.psi_initial, "$.psi_initial");
    check_boundary(spec.psi_final, "$.psi_final");

    for (std::size_t s = 0; s < spec.segments.size(); ++s) {
        const std::string loc = "$.segments[" + std::to_string(s) + "]";
        if (spec.segments[s].dim() != spec.dim) {
            fail("dimension_mismatch", loc, "segment dim " + std::to_string(spec.segments[s].dim()));
            continue;
        }
        const double defect = unitarity_defect(spec.segments[s]);
        if (defect > defaults::unitarity_tol)
            fail("non_unitary_segment", loc, "unitarity defect " + std::to_string(defect));
    }

    for (std::size_t s = 0; s < spec.slices.size(); ++s) {
        const SliceBasis& sl = spec.slices[s];
        const std::string loc = "$.slices[" + std::to_string(s) + "]";
        for (std::size_t t = s + 1; t < spec.slices.size(); ++t)
            if (spec.slices[t].time_label == sl.time_label)
                fail("duplicate_slice_label", loc, "label '" + sl.time_label + "' reused at slice " + std::to_string(t));
        bool dims_ok = true;
        for (std::size_t j = 0; j < sl.basis.size(); ++j) {
            if (sl.basis[j].dim() != spec.dim) {
                fail("dimension_mismatch", loc + ".basis[" + std::to_string(j) + "]",
                     "basis vector dim " + std::to_string(sl.basis[j].dim()));
                dims_ok = false;
            }
        }
        if (!dims_ok) continue;
        double ortho_defect = 0.0;
        for (std::size_t a = 0; a < sl.basis.size(); ++a) {
            for (std::size_t b = a; b < sl.basis.size(); ++b) {
                const Complex ip = inner_product(sl.basis[a], sl.basis[b]);
                const double want = (a == b) ? 1.0 : 0.0;
                ortho_defect = std::max(ortho_defect, std::abs(ip - want));
            }
        }
        if (ortho_defect > defaults::orthonormality_tol)
            fail("non_orthonormal_slice", loc, "orthonormality defect " + std::to_string(ortho_defect));
        // Completeness: Σ|b⟩⟨b| = I.
        double completeness_defect = 0.0;
        for (int r = 0; r < spec.dim; ++r) {
            for (int c = 0; c < spec.dim; ++c) {
                Complex sum(0.0, 0.0);
                for (const StateVector& b : sl.basis) sum += b[r] * std::conj(b[c]);
                if (r == c) sum -= 1.0;
                completeness_defect = std::max(completeness_defect, std::abs(sum));
            }
        }
        if (completeness_defect > defaults::completeness_tol)
            fail("incomplete_slice", loc, "completeness defect " + std::to_string(completeness_defect));
    }

    for (const auto& [obs_name, obs] : spec.observables) {
        const std::string loc = "$.observables." + obs_name;
        if (obs.dim() != spec.dim) {
            fail("dimension_mismatch", loc, "observable dim " + std::to_string(obs.dim()));
            continue;
        }
        const double h = hermiticity_defect(obs);
        if (h > defaults::hermiticity_tol) fail("non_hermitian_observable", loc, "hermiticity defect " + std::to_string(h));
    }

    const std::size_t n_paths = path_count(spec);
    if (n_paths == 0)
        fail("incomplete_slice", "$.slices", "a slice has an empty basis");
    else if (n_paths > defaults::max_paths)
        fail("path_cap", "$.slices", "path count " + std::to_string(n_paths) + " exceeds cap");

    auto require_slice = [&](const std::string& label, const std::string& loc) -> int {
        const int pos = slice_position(spec, label);
        if (pos < 0) fail("invalid_functional", loc, "unknown slice label '" + label + "'");
        return pos;
    };
    auto require_observable = [&](const std::string& obs_name, const std::string& loc) -> const LinearOperator* {
        auto it = spec.observables.find(obs_name);
        if (it == spec.observables.end()) {
            fail("invalid_functional", loc, "unknown observable '" + obs_name + "'");
            return nullptr;
        }
        return &it->second;
    };
    auto check_diagonal = [&](const LinearOperator& obs, int slice_pos, const std::string& loc) {
        const auto chk = detail::observable_on_slice(obs, spec.slices[static_cast<std::size_t>(slice_pos)]);
        if (!chk.ok)
            fail("observable_not_diagonal_in_slice", loc,
                 "slice basis vector " + std::to_string(chk.bad_index) + " is not an eigenvector (residual " +
                     std::to_string(chk.defect) + ")");
    };

    for (const auto& [fname, f] : spec.functionals) {
        const std::string loc = "$.functionals." + fname;
        switch (f.kind) {
            case FunctionalKind::indicator:
                for (std::size_t p : f.paths)
                    if (p >= n_paths) fail("invalid_functional", loc, "path index " + std::to_string(p) + " out of range");
                break;
            case FunctionalKind::projector: {
                const int pos = require_slice(f.slice, loc);
                if (pos >= 0) {
                    const auto sz = spec.slices[static_cast<std::size_t>(pos)].basis.size();
                    if (f.index < 0 || static_cast<std::size_t>(f.index) >= sz)
                        fail("invalid_functional", loc, "basis index " + std::to_string(f.index) + " out of range");
                }
                break;
            }
            case FunctionalKind::observable_at: {
                const int pos = require_slice(f.slice, loc);
                const LinearOperator* obs = require_observable(f.observable, loc);
                if (pos >= 0 && obs != nullptr && obs->dim() == spec.dim) check_diagonal(*obs, pos, loc);
                break;
            }
            case FunctionalKind::two_time_difference: {
                const int pa = require_slice(f.slice_a, loc);
                const int pb = require_slice(f.slice_b, loc);
                const LinearOperator* obs = require_observable(f.observable, loc);
                if (obs != nullptr && obs->dim() == spec.dim) {
                    if (pa >= 0) check_diagonal(*obs, pa, loc);
                    if (pb >= 0) check_diagonal(*obs, pb, loc);
                }
                break;
            }
            case FunctionalKind::table:
                if (f.values.size() != n_paths)
                    fail("invalid_functional", loc,
                         "table has " + std::to_string(f.values.size()) + " values for " + std::to_string(n_paths) + " paths");
                for (double v : f.values)
                    if (!std::isfinite(v)) fail("invalid_functional", loc, "non-finite table value");
                break;
        }
    }

    for (const auto& [meter, fname] : spec.meters)
        if (spec.functionals.find(fname) == spec.functionals.end())
            fail("dangling_meter_reference", "$.meters." + meter, "meter '" + meter + "' references unknown functional '" + fname + "'");

    return diags;
}

// ---------------------------------------------------------------------------
// JSON serialization / parsing
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::ordered_json complex_to_json(const Complex& c) { return nlohmann::ordered_json::array({c.real(), c.imag()}); }

inline nlohmann::ordered_json vector_to_json(const StateVector& v) {
    auto arr = nlohmann::ordered_json::array();
    for (int i = 0; i < v.dim(); ++i) arr.push_back(complex_to_json(v[i]));
    return arr;
}

inline nlohmann::ordered_json matrix_to_json(const LinearOperator& m) {
    auto rows = nlohmann::ordered_json::array();
    for (int r = 0; r < m.dim(); ++r) {
        auto row = nlohmann::ordered_json::array();
        for (int c = 0; c < m.dim(); ++c) row.push_back(complex_to_json(m.at(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nlohmann::ordered_json functional_to_json(const FunctionalSpec& f) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(f.kind);
    switch (f.kind) {
        case FunctionalKind::indicator: j["paths"] = f.paths; break;
        case FunctionalKind::projector:
            j["slice"] = f.slice;
            j["index"] = f.index;
            break;
        case FunctionalKind::observable_at:
            j["slice"] = f.slice;
            j["observable"] = f.observable;
            break;
        case FunctionalKind::two_time_difference:
            j["slice_a"] = f.slice_a;
            j["slice_b"] = f.slice_b;
            j["observable"] = f.observable;
            break;
        case FunctionalKind::table: j["values"] = f.values; break;
    }
    return j;
}

}  // namespace detail

/// Canonical JSON serialization (fixed key order, round-trip-exact doubles).
inline std::string serialize_scenario(const ScenarioSpec& spec) {
    nlohmann::ordered_json j;
    j["name"] = spec.name;
    j["dim"] = spec.dim;
    j["psi_initial"] = detail::vector_to_json(spec.psi_initial);
    j["psi_final"] = detail::vector_to_json(spec.psi_final);
    auto segs = nlohmann::ordered_json::array();
    for (const auto& s : spec.segments) segs.push_back(detail::matrix_to_json(s));
    j["segments"] = std::move(segs);
    auto slices = nlohmann::ordered_json::array();
    for (const auto& s : spec.slices) {
        nlohmann::ordered_json js;
        js["label"] = s.time_label;
        auto basis = nlohmann::ordered_json::array();
        for (const auto& b : s.basis) basis.push_back(detail::vector_to_json(b));
        js["basis"] = std::move(basis);
        slices.push_back(std::move(js));
    }
    j["slices"] = std::move(slices);
    auto obs = nlohmann::ordered_json::object();
    for (const auto& [n, m] : spec.observables) obs[n] = detail::matrix_to_json(m);
    j["observables"] = std::move(obs);
    auto fns = nlohmann::ordered_json::object();
    for (const auto& [n, f] : spec.functionals) fns[n] = detail::functional_to_json(f);
    j["functionals"] = std::move(fns);
    auto meters = nlohmann::ordered_json::object();
    for (const auto& [n, f] : spec.meters) meters[n] = f;
    j["meters"] = std::move(meters);
    return j.dump();
}

/// 64-bit FNV-1a over the canonical serialization, as 16 hex digits.
inline std::string scenario_digest(const ScenarioSpec& spec) {
    const std::string text = serialize_scenario(spec);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = hex[h & 0xf];
        h >>= 4;
    }
    return out;
}

namespace detail {

class ScenarioParser {
  public:
    explicit ScenarioParser(const std::string& text) : text_(text) {}

    ScenarioSpec run() {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text_);
        } catch (const nlohmann::json::parse_error& e) {
            fail("syntax_error", "$", e.what());
            throw_all();
        }
        if (!doc.is_object()) {
            fail("syntax_error", "$", "top level must be a JSON object");
            throw_all();
        }

        static const std::vector<std::string> known = {"name",   "dim",         "psi_initial", "psi_final", "segments",
                                                       "slices", "observables", "functionals", "meters"};
        for (const auto& [key, _] : doc.items())
            if (std::find(known.begin(), known.end(), key) == known.end())
                fail("unknown_key", "$." + key, "unrecognized top-level key");

        std::string name = read_string(doc, "name", "$.name").value_or("");
        int dim = 0;
        if (const auto* jd = require(doc, "dim", "$.dim")) {
            if (jd->is_number_integer() && jd->get<std::int64_t>() > 0)
                dim = static_cast<int>(jd->get<std::int64_t>());
            else
                fail("wrong_type", "$.dim", "dim must be a positive integer");
        }
        auto psi_i = read_vector(require(doc, "psi_initial", "$.psi_initial"), "$.psi_initial");
        auto psi_f = read_vector(require(doc, "psi_final", "$.psi_final"), "$.psi_final");

        std::vector<LinearOperator> segments;
        if (const auto* js = require(doc, "segments", "$.segments")) {
            if (!js->is_array() || js->empty())
                fail("wrong_type", "$.segments", "segments must be a non-empty array of matrices");
            else
                for (std::size_t i = 0; i < js->size(); ++i) {
                    auto m = read_matrix((*js)[i], "$.segments[" + std::to_string(i) + "]");
                    if (m) segments.push_back(std::move(*m));
                }
        }

        std::vector<SliceBasis> slices;
        if (const auto* js = require(doc, "slices", "$.slices")) {
            if (!js->is_array())
                fail("wrong_type", "$.slices", "slices must be an array");
            else
                for (std::size_t i = 0; i < js->size(); ++i) read_slice((*js)[i], i, slices);
        }

        std::map<std::string, LinearOperator> observables;
        if (auto it = doc.find("observables"); it != doc.end()) {
            if (!it->is_object())
                fail("wrong_type", "$.observables", "observables must be an object");
            else
                for (const auto& [oname, jm] : it->items()) {
                    auto m = read_matrix(jm, "$.observables." + oname);
                    if (m) observables.emplace(oname, std::move(*m));
                }
        }

        std::map<std::string, FunctionalSpec> functionals;
        if (auto it = doc.find("functionals"); it != doc.end()) {
            if (!it->is_object())
                fail("wrong_type", "$.functionals", "functionals must be an object");
            else
                for (const auto& [fname, jf] : it->items()) {
                    auto f = read_functional(jf, "$.functionals." + fname);
                    if (f) functionals.emplace(fname, std::move(*f));
                }
        }

        std::map<std::string, std::string> meters;
        if (auto it = doc.find("meters"); it != doc.end()) {
            if (!it->is_object())
                fail("wrong_type", "$.meters", "meters must be an object");
            else
                for (const auto& [mname, jv] : it->items()) {
                    if (jv.is_string())
                        meters.emplace(mname, jv.get<std::string>());
                    else
                        fail("wrong_type", "$.meters." + mname, "meter value must be a functional name");
                }
        }

        if (!diags_.empty() || !psi_i || !psi_f) throw_all();

        ScenarioSpec spec{std::move(name),    dim,
                          StateVector(std::move(*psi_i)), StateVector(std::move(*psi_f)),
                          std::move(segments), std::move(slices),
                          std::move(observables), std::move(functionals), std::move(meters)};
        auto semantic = validate(spec);
        if (!semantic.empty())
            throw ParseError(std::move(semantic), "scenario document failed validation");
        return spec;
    }

  private:
    void fail(std::string code, std::string loc, std::string msg) {
        diags_.push_back(Diagnostic{std::move(code), std::move(msg), std::move(loc)});
    }
    [[noreturn]] void throw_all() {
        if (diags_.empty()) fail("syntax_error", "$", "malformed scenario document");
        throw ParseError(diags_, "scenario document could not be parsed");
    }

    const nlohmann::json* require(const nlohmann::json& doc, const char* key, const std::string& loc) {
        auto it = doc.find(key);
        if (it == doc.end()) {
            fail("missing_field", loc, std::string("required key '") + key + "' is absent");
            return nullptr;
        }
        return &*it;
    }

    std::optional<std::string> read_string(const nlohmann::json& doc, const char* key, const std::string& loc) {
        auto it = doc.find(key);
        if (it == doc.end()) {
            fail("missing_field", loc, std::string("required key '") + key + "' is absent");
            return std::nullopt;
        }
        if (!it->is_string()) {
            fail("wrong_type", loc, "expected a string");
            return std::nullopt;
        }
        return it->get<std::string>();
    }

    std::optional<Complex> read_complex(const nlohmann::json& j, const std::string& loc) {
        if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
            fail("bad_complex", loc, "complex values are two-element [re, im] arrays");
            return std::nullopt;
        }
        return Complex(j[0].get<double>(), j[1].get<double>());
    }

    std::optional<std::vector<Complex>> read_vector(const nlohmann::json* j, const std::string& loc) {
        if (j == nullptr) return std::nullopt;
        if (!j->is_array() || j->empty()) {
            fail("wrong_type", loc, "expected a non-empty array of complex entries");
            return std::nullopt;
        }
        std::vector<Complex> out;
        for (std::size_t i = 0; i < j->size(); ++i) {
            auto c = read_complex((*j)[i], loc + "[" + std::to_string(i) + "]");
            if (!c) return std::nullopt;
            out.push_back(*c);
        }
        return out;
    }

    std::optional<LinearOperator> read_matrix(const nlohmann::json& j, const std::string& loc) {
        if (!j.is_array() || j.empty()) {
            fail("wrong_type", loc, "expected a non-empty array of rows");
            return std::nullopt;
        }
        const std::size_t n = j.size();
        std::vector<Complex> flat;
        flat.reserve(n * n);
        for (std::size_t r = 0; r < n; ++r) {
            const auto& row = j[r];
            if (!row.is_array() || row.size() != n) {
                fail("wrong_type", loc + "[" + std::to_string(r) + "]", "matrix must be square (row-major nested arrays)");
                return std::nullopt;
            }
            for (std::size_t c = 0; c < n; ++c) {
                auto z = read_complex(row[c], loc + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
                if (!z) return std::nullopt;
                flat.push_back(*z);
            }
        }
        return LinearOperator(static_cast<int>(n), std::move(flat));
    }

    void read_slice(const nlohmann::json& j, std::size_t i, std::vector<SliceBasis>& out) {
        const std::string loc = "$.slices[" + std::to_string(i) + "]";
        if (!j.is_object()) {
            fail("wrong_type", loc, "each slice is an object with 'label' and 'basis'");
            return;
        }
        for (const auto& [key, _] : j.items())
            if (key != "label" && key != "basis") fail("unknown_key", loc + "." + key, "unrecognized slice key");
        auto label = read_string(j, "label", loc + ".label");
        auto jb = j.find("basis");
        if (jb == j.end() || !jb->is_array() || jb->empty()) {
            fail("wrong_type", loc + ".basis", "expected a non-empty array of basis vectors");
            return;
        }
        std::vector<StateVector> basis;
        for (std::size_t v = 0; v < jb->size(); ++v) {
            auto vec = read_vector(&(*jb)[v], loc + ".basis[" + std::to_string(v) + "]");
            if (!vec) return;
            basis.emplace_back(std::move(*vec));
        }
        if (label) out.push_back(SliceBasis{std::move(*label), std::move(basis)});
    }

    std::optional<FunctionalSpec> read_functional(const nlohmann::json& j, const std::string& loc) {
        if (!j.is_object()) {
            fail("wrong_type", loc, "functional must be an object with a 'kind'");
            return std::nullopt;
        }
        auto kind = read_string(j, "kind", loc + ".kind");
        if (!kind) return std::nullopt;

        auto reject_unknown = [&](std::initializer_list<const char*> allowed) {
            for (const auto& [key, _] : j.items()) {
                bool ok = key == "kind";
                for (const char* a : allowed) ok = ok || key == a;
                if (!ok) fail("unknown_key", loc + "." + key, "unrecognized functional key");
            }
        };
        auto field_string = [&](const char* key) { return read_string(j, key, loc + "." + key); };

        if (*kind == "indicator") {
            reject_unknown({"paths"});
            auto it = j.find("paths");
            if (it == j.end() || !it->is_array()) {
                fail("wrong_type", loc + ".paths", "expected an array of path indices");
                return std::nullopt;
            }
            std::vector<std::size_t> paths;
            for (const auto& p : *it) {
                if (!p.is_number_integer() || p.get<std::int64_t>() < 0) {
                    fail("wrong_type", loc + ".paths", "path indices must be non-negative integers");
                    return std::nullopt;
                }
                paths.push_back(static_cast<std::size_t>(p.get<std::int64_t>()));
            }
            return FunctionalSpec::indicator_of(std::move(paths));
        }
        if (*kind == "projector") {
            reject_unknown({"slice", "index"});
            auto slice = field_string("slice");
            auto it = j.find("index");
            if (it == j.end() || !it->is_number_integer()) {
                fail("wrong_type", loc + ".index", "expected an integer basis index");
                return std::nullopt;
            }
            if (!slice) return std::nullopt;
            return FunctionalSpec::projector_at(std::move(*slice), static_cast<int>(it->get<std::int64_t>()));
        }
        if (*kind == "observable_at") {
            reject_unknown({"slice", "observable"});
            auto slice = field_string("slice");
            auto obs = field_string("observable");
            if (!slice || !obs) return std::nullopt;
            return FunctionalSpec::observable_at(std::move(*slice), std::move(*obs));
        }
        if (*kind == "two_time_difference") {
            reject_unknown({"slice_a", "slice_b", "observable"});
            auto a = field_string("slice_a");
            auto b = field_string("slice_b");
            auto obs = field_string("observable");
            if (!a || !b || !obs) return std::nullopt;
            return FunctionalSpec::difference(std::move(*a), std::move(*b), std::move(*obs));
        }
        if (*kind == "table") {
            reject_unknown({"values"});
            auto it = j.find("values");
            if (it == j.end() || !it->is_array()) {
                fail("wrong_type", loc + ".values", "expected an array of numbers");
                return std::nullopt;
            }
            std::vector<double> values;
            for (const auto& v : *it) {
                if (!v.is_number()) {
                    fail("wrong_type", loc + ".values", "table values must be numbers");
                    return std::nullopt;
                }
                values.push_back(v.get<double>());
            }
            return FunctionalSpec::table_of(std::move(values));
        }
        fail("unknown_kind", loc + ".kind", "unknown functional kind '" + *kind + "'");
        return std::nullopt;
    }

    const std::string& text_;
    std::vector<Diagnostic> diags_;
};

}  // namespace detail

/// Parse and fully validate a scenario document. Total: malformed input of
/// any shape produces a ParseError carrying diagnostics, never a crash.
inline ScenarioSpec parse_scenario(const std::string& text) { return detail::ScenarioParser(text).run(); }

// ---------------------------------------------------------------------------
// Built-in scenario library
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<StateVector> standard_basis(int dim) {
    std::vector<StateVector> out;
    out.reserve(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) out.push_back(StateVector::basis(dim, i));
    return out;
}

inline LinearOperator hadamard2() {
    const double s = 1.0 / std::sqrt(2.0);
    return LinearOperator({{Complex(s, 0), Complex(s, 0)}, {Complex(s, 0), Complex(-s, 0)}});
}

inline LinearOperator sigma_z() {
    return LinearOperator({{Complex(1, 0), Complex(0, 0)}, {Complex(0, 0), Complex(-1, 0)}});
}

/// Splitter with first column (1,-1,1)/√3; the remaining columns are a
/// closed-form real orthonormal completion.
inline LinearOperator three_way_split() {
    const double a = 1.0 / std::sqrt(3.0), b = 1.0 / std::sqrt(2.0), c = 1.0 / std::sqrt(6.0);
    return LinearOperator({{Complex(a, 0), Complex(b, 0), Complex(-c, 0)},
                           {Complex(-a, 0), Complex(b, 0), Complex(c, 0)},
                           {Complex(a, 0), Complex(0, 0), Complex(2 * c, 0)}});
}

/// Recombiner with first row (1,1,1)/√3.
inline LinearOperator three_way_merge() {
    const double a = 1.0 / std::sqrt(3.0), b = 1.0 / std::sqrt(2.0), c = 1.0 / std::sqrt(6.0);
    return LinearOperator({{Complex(a, 0), Complex(a, 0), Complex(a, 0)},
                           {Complex(b, 0), Complex(-b, 0), Complex(0, 0)},
                           {Complex(c, 0), Complex(c, 0), Complex(-2 * c, 0)}});
}

/// Entry segment for the blocked-arm variant: routes everything into the
/// outer arm (first column e3), so both loop amplitudes vanish.
inline LinearOperator blocked_split() {
    return LinearOperator({{Complex(0, 0), Complex(1, 0), Complex(0, 0)},
                           {Complex(0, 0), Complex(0, 0), Complex(1, 0)},
                           {Complex(1, 0), Complex(0, 0), Complex(0, 0)}});
}

inline LinearOperator loop_union_projector() {
    return LinearOperator({{Complex(1, 0), Complex(0, 0), Complex(0, 0)},
                           {Complex(0, 0), Complex(1, 0), Complex(0, 0)},
                           {Complex(0, 0), Complex(0, 0), Complex(0, 0)}});
}

}  // namespace detail

inline std::vector<std::string> builtin_names() {
    return {"three_path", "nested_loop", "blocked_arm", "two_time_qubit", "hadamard_qubit"};
}

/// The built-in scenario library. Every entry passes validate().
inline ScenarioSpec builtin(const std::string& name) {
    using detail::standard_basis;
    if (name == "hadamard_qubit") {
        ScenarioSpec spec{"hadamard_qubit",
                          2,
                          StateVector::basis(2, 0),
                          StateVector::basis(2, 0),
                          {detail::hadamard2(), detail::hadamard2()},
                          {SliceBasis{"t", standard_basis(2)}},
                          {{"sz", detail::sigma_z()}},
                          {{"sz", FunctionalSpec::observable_at("t", "sz")}},
                          {{"M", "sz"}}};
        return spec;
    }
    if (name == "two_time_qubit") {
        ScenarioSpec spec{"two_time_qubit",
                          2,
                          StateVector::basis(2, 0),
                          StateVector::basis(2, 0),
                          {detail::hadamard2(), detail::hadamard2(), LinearOperator::identity(2)},
                          {SliceBasis{"t1", standard_basis(2)}, SliceBasis{"t2", standard_basis(2)}},
                          {{"sz", detail::sigma_z()}},
                          {{"diff", FunctionalSpec::difference("t1", "t2", "sz")},
                           {"sz_t1", FunctionalSpec::observable_at("t1", "sz")}},
                          {{"M", "diff"}}};
        return spec;
    }
    if (name == "three_path") {
        ScenarioSpec spec{"three_path",
                          3,
                          StateVector::basis(3, 0),
                          StateVector::basis(3, 0),
                          {detail::three_way_split(), detail::three_way_merge()},
                          {SliceBasis{"t", standard_basis(3)}},
                          {{"pi12", detail::loop_union_projector()}},
                          {{"union12", FunctionalSpec::indicator_of({0, 1})},
                           {"proj1", FunctionalSpec::projector_at("t", 0)},
                           {"proj2", FunctionalSpec::projector_at("t", 1)},
                           {"proj3", FunctionalSpec::projector_at("t", 2)}},
                          {{"O", "union12"}, {"Oprime", "union12"}, {"E", "proj1"}, {"Eprime", "proj1"}}};
        return spec;
    }
    if (name == "nested_loop" || name == "blocked_arm") {
        const bool blocked = (name == "blocked_arm");
        ScenarioSpec spec{name,
                          3,
                          StateVector::basis(3, 0),
                          StateVector::basis(3, 0),
                          {blocked ? detail::blocked_split() : detail::three_way_split(), LinearOperator::identity(3),
                           detail::three_way_merge()},
                          {SliceBasis{"t1", standard_basis(3)}, SliceBasis{"t2", standard_basis(3)}},
                          {{"pi12", detail::loop_union_projector()}},
                          {{"union12", FunctionalSpec::observable_at("t1", "pi12")},
                           {"union12_out", FunctionalSpec::observable_at("t2", "pi12")},
                           {"proj1", FunctionalSpec::projector_at("t1", 0)},
                           {"proj2", FunctionalSpec::projector_at("t1", 1)},
                           {"proj1_out", FunctionalSpec::projector_at("t2", 0)}},
                          {{"O", "union12"}, {"Oprime", "union12_out"}, {"E", "proj1"}, {"Eprime", "proj1_out"}}};
        return spec;
    }
    throw Error(Errc::unknown_name, "unknown builtin scenario '" + name + "'");
}

}  // namespace pathsim
