#pragma once

// JSON form-specification documents:
//   {"dim": m, "degree": k, "terms": [{"coeff": "<expr>", "index": [i, j]}]}
// Axes are 1-based; symplectic coordinates (x_1, y_1, ..., x_n, y_n) map to
// axes 1..2n in order, so y_i is axis 2i. Duplicate indices are summed.

#include "moser/form.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace moser {

struct FormTerm {
    std::string coeff;
    std::vector<int> index; // 1-based axes
};

struct FormSpec {
    int dim = 0;
    int degree = 0;
    std::vector<FormTerm> terms;
    bool time_dependent = false;
};

struct LoadOptions {
    /// Accept non-increasing indices and fold them into increasing order with the permutation sign.
    bool normalize_indices = false;
};

inline FormSpec parse_form_spec(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SchemaError("form spec must be a JSON object");
    for (const char* key : {"dim", "degree", "terms"})
        if (!doc.contains(key)) throw SchemaError(std::string("form spec is missing field \"") + key + "\"");
    for (const auto& [key, _] : doc.items())
        if (key != "dim" && key != "degree" && key != "terms" && key != "time_dependent")
            throw SchemaError("unknown form spec field \"" + key + "\"");
    if (!doc["dim"].is_number_integer()) throw SchemaError("\"dim\" must be an integer");
    if (!doc["degree"].is_number_integer()) throw SchemaError("\"degree\" must be an integer");
    if (!doc["terms"].is_array()) throw SchemaError("\"terms\" must be an array");
    FormSpec spec;
    spec.dim = doc["dim"].get<int>();
    spec.degree = doc["degree"].get<int>();
    if (spec.dim < 1 || spec.dim > kMaxDim) throw SchemaError("\"dim\" must lie in [1, 12]");
    if (spec.degree < 0 || spec.degree > spec.dim) throw SchemaError("\"degree\" must lie in [0, dim]");
    if (doc.contains("time_dependent")) {
        if (!doc["time_dependent"].is_boolean()) throw SchemaError("\"time_dependent\" must be a boolean");
        spec.time_dependent = doc["time_dependent"].get<bool>();
    }
    std::size_t i = 0;
    for (const auto& term : doc["terms"]) {
        const std::string where = "terms[" + std::to_string(i++) + "]";
        if (!term.is_object() || !term.contains("coeff") || !term.contains("index"))
            throw SchemaError(where + " must be an object with \"coeff\" and \"index\"");
        if (!term["coeff"].is_string()) throw SchemaError(where + ".coeff must be a string");
        if (!term["index"].is_array()) throw SchemaError(where + ".index must be an array");
        FormTerm t;
        t.coeff = term["coeff"].get<std::string>();
        for (const auto& ax : term["index"]) {
            if (!ax.is_number_integer()) throw SchemaError(where + ".index entries must be integers");
            t.index.push_back(ax.get<int>());
        }
        if (static_cast<int>(t.index.size()) != spec.degree)
            throw SchemaError(where + ".index has length " + std::to_string(t.index.size()) + ", expected degree " +
                              std::to_string(spec.degree));
        spec.terms.push_back(std::move(t));
    }
    return spec;
}

inline nlohmann::ordered_json to_json(const FormSpec& spec) {
    nlohmann::ordered_json doc;
    doc["dim"] = spec.dim;
    doc["degree"] = spec.degree;
    doc["terms"] = nlohmann::ordered_json::array();
    for (const auto& t : spec.terms) doc["terms"].push_back({{"coeff", t.coeff}, {"index", t.index}});
    if (spec.time_dependent) doc["time_dependent"] = true;
    return doc;
}

/// Symbolic coefficient list (lexicographic basis order) for a spec.
inline std::vector<Expr> spec_coefficients(const FormSpec& spec, const LoadOptions& opts = {}) {
    const auto& b = basis(spec.dim, spec.degree);
    std::vector<Expr> coeffs(b.size(), Expr::constant(0.0));
    for (std::size_t i = 0; i < spec.terms.size(); ++i) {
        const auto& term = spec.terms[i];
        const std::string where = "terms[" + std::to_string(i) + "]";
        std::vector<int> axes;
        for (int a : term.index) {
            if (a < 1 || a > spec.dim)
                throw IndexError(where + ": axis " + std::to_string(a) + " outside [1, " + std::to_string(spec.dim) + "]");
            axes.push_back(a - 1);
        }
        int sign = 1;
        bool increasing = true;
        for (std::size_t j = 1; j < axes.size(); ++j) increasing = increasing && axes[j] > axes[j - 1];
        if (!increasing) {
            if (!opts.normalize_indices) throw IndexError(where + ": index is not strictly increasing");
            sign = permutation_sign(axes);
            if (sign == 0) continue; // repeated axis: the basis element vanishes
            std::sort(axes.begin(), axes.end());
        }
        Expr e;
        try {
            e = parse_expr(term.coeff, spec.dim);
        } catch (const SyntaxError& err) {
            throw SyntaxError(err.position(), where + ".coeff: " + err.message());
        }
        const MultiIndex mi(axes, spec.dim);
        auto& slot = coeffs[static_cast<std::size_t>(b.rank(mi.mask()))];
        slot = sign > 0 ? slot + e : slot - e;
    }
    return coeffs;
}

inline TimeForm load_form_spec(const FormSpec& spec, const LoadOptions& opts = {}) {
    return TimeForm::symbolic(spec.dim, spec.degree, spec_coefficients(spec, opts));
}

inline TimeForm load_form_spec(const nlohmann::json& doc, const LoadOptions& opts = {}) {
    return load_form_spec(parse_form_spec(doc), opts);
}

/// Parses JSON text; malformed JSON is reported as SchemaError with its byte offset.
inline nlohmann::json parse_json_text(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

inline TimeForm load_form_spec_text(const std::string& text, const LoadOptions& opts = {}) {
    return load_form_spec(parse_json_text(text), opts);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline TimeForm load_form_spec_file(const std::string& path, const LoadOptions& opts = {}) {
    return load_form_spec_text(read_text_file(path), opts);
}

} // namespace moser
