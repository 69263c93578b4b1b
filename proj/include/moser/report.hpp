#pragma once

// JSON and CSV reports: fixed field order, floats with 17 significant digits,
// non-finite values as null, files replaced atomically.

#include "moser/contact.hpp"
#include "moser/path_method.hpp"
#include "moser/stability.hpp"

#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace moser {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1";

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void dump_string(std::ostringstream& os, const std::string& s) {
    os << Json(s).dump();
}

inline void dump(std::ostringstream& os, const Json& j, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << "{" << nl;
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) os << "," << nl;
            first = false;
            os << pad;
            dump_string(os, it.key());
            os << (indent > 0 ? ": " : ":");
            dump(os, it.value(), indent, depth + 1);
        }
        os << nl << close << "}";
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            os << "[]";
            return;
        }
        os << "[" << nl;
        bool first = true;
        for (const auto& v : j) {
            if (!first) os << "," << nl;
            first = false;
            os << pad;
            dump(os, v, indent, depth + 1);
        }
        os << nl << close << "]";
        return;
    }
    case Json::value_t::number_float: {
        const double v = j.get<double>();
        if (std::isfinite(v))
            os << format_double(v);
        else
            os << "null";
        return;
    }
    default: os << j.dump(); return;
    }
}

} // namespace detail

/// Serializes with %.17g floats; the output is a pure function of the document.
inline std::string to_json_text(const Json& j, int indent = 2) {
    std::ostringstream os;
    detail::dump(os, j, indent, 0);
    os << "\n";
    return os.str();
}

/// Writes via a temporary file in the same directory and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    if (!dir.empty()) std::filesystem::create_directories(dir);
    const auto tmp = dir / ("." + path.filename().string() + ".tmp." + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw Error("failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error("cannot move report into place at " + path.string() + ": " + ec.message());
    }
}

inline Json report_header(const std::string& command) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = command;
    return j;
}

inline Json to_json(const Point& x) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < x.size(); ++i) a.push_back(x[i]);
    return a;
}

inline Json to_json(const Matrix& m) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Point(m.row(i).transpose())));
    return a;
}

inline Json to_json(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(x);
    return a;
}

inline Json to_json(const SamplerSpec& s) {
    Json j;
    j["seed"] = s.seed;
    j["count"] = s.count;
    return j;
}

inline Json to_json(const IntegratorSpec& s) {
    Json j;
    j["method"] = "dormand_prince_5_4";
    j["rel_tol"] = s.rel_tol;
    j["abs_tol"] = s.abs_tol;
    j["max_steps"] = s.max_steps;
    j["escape_radius"] = s.escape_radius;
    j["min_step"] = s.min_step;
    return j;
}

inline Json to_json(const NormProfile& p) {
    Json j;
    j["norm_kind"] = to_string(p.norm_kind);
    j["chart"] = to_string(p.chart);
    j["inverse"] = p.inverse;
    j["sampler"] = to_json(p.sampler);
    j["radii"] = to_json(p.radii);
    j["values"] = to_json(p.values);
    return j;
}

inline Json to_json(const LogVarReport& r) {
    Json j;
    j["t"] = r.t;
    j["norm_kind"] = to_string(r.norm_kind);
    j["chart"] = to_string(r.chart);
    j["r_max"] = r.r_max;
    j["sup"] = r.sup;
    j["argmax_radius"] = r.argmax_radius;
    j["radii"] = to_json(r.radii);
    j["norm_inv"] = to_json(r.norm_inv);
    j["norm_beta"] = to_json(r.norm_beta);
    j["product"] = to_json(r.product);
    j["logvar_term"] = to_json(r.term);
    return j;
}

inline Json to_json(const TotalLogVarReport& r) {
    Json j;
    j["total"] = r.total;
    j["r_max"] = r.r_max;
    j["t_quadrature"] = "composite_simpson";
    j["t_nodes"] = r.times.size();
    Json per = Json::array();
    for (const auto& lv : r.per_time) per.push_back(to_json(lv));
    j["per_time"] = per;
    return j;
}

inline Json to_json(const GrowthFit& f) {
    Json j;
    j["model"] = to_string(f.model);
    j["constant"] = f.constant;
    j["lsq_constant"] = f.lsq_constant;
    j["exponent"] = f.exponent;
    j["residual"] = f.residual;
    j["max_ratio"] = f.max_ratio;
    j["r_min"] = f.r_min;
    j["r_max"] = f.r_max;
    j["ratios"] = to_json(f.ratios);
    return j;
}

inline Json to_json(const LinearFamilyReport& r) {
    Json j;
    j["A"] = r.A;
    j["contraction"] = r.contraction;
    j["nondegenerate"] = r.nondegenerate;
    j["min_margin"] = r.min_margin;
    j["total_bound"] = r.total_bound ? Json(*r.total_bound) : Json(nullptr);
    j["verdict"] = r.pass ? "pass" : "fail";
    j["radii"] = to_json(r.radii);
    j["products"] = to_json(r.products);
    return j;
}

inline Json to_json(const PseudometricReport& r) {
    Json j;
    j["finite"] = r.finite;
    j["bound"] = r.finite ? Json(r.bound) : Json("infinity");
    j["reason"] = r.reason;
    j["times"] = to_json(r.times);
    j["per_time"] = to_json(r.per_time);
    return j;
}

inline Json to_json(const FlowRecord& f, bool full = false) {
    Json j;
    j["status"] = to_string(f.status);
    j["message"] = f.message;
    j["arc_length"] = f.arc_length;
    j["steps"] = f.times.size() - 1;
    j["rejected_steps"] = f.rejected_steps;
    j["end_time"] = f.times.back();
    j["end_point"] = to_json(f.end_point());
    j["end_jacobian"] = to_json(f.end_jacobian());
    if (full) {
        Json traj = Json::array();
        for (std::size_t i = 0; i < f.times.size(); ++i) {
            Json s;
            s["t"] = f.times[i];
            s["x"] = to_json(f.points[i]);
            traj.push_back(s);
        }
        j["trajectory"] = traj;
    }
    return j;
}

inline Json to_json(const VerificationReport& r) {
    Json j;
    j["verdict"] = r.pass ? "pass" : "fail";
    j["tolerance"] = r.tolerance;
    j["max_residual"] = r.max_residual;
    j["norm_kind"] = to_string(r.norm_kind);
    j["probe_defect"] = r.probe_defect;
    j["max_arc_length"] = r.max_arc_length;
    j["escapes"] = r.escapes;
    j["underflows"] = r.underflows;
    j["times"] = to_json(r.times);
    Json pts = Json::array();
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        Json p;
        p["index"] = i;
        p["x"] = to_json(r.points[i]);
        p["residuals"] = to_json(r.residuals[i]);
        if (i < r.flows.size()) p["flow"] = to_json(r.flows[i]);
        pts.push_back(p);
    }
    j["points"] = pts;
    return j;
}

inline Json to_json(const GrayReport& r) {
    Json j;
    j["verdict"] = r.pass ? "pass" : "fail";
    j["tolerance"] = r.tolerance;
    j["max_residual"] = r.max_residual;
    j["min_factor"] = r.min_factor;
    j["rate_checked"] = r.rate_checked;
    j["rate_tolerance"] = r.rate_tolerance;
    j["max_rate_error"] = r.max_rate_error;
    j["escapes"] = r.escapes;
    j["underflows"] = r.underflows;
    j["times"] = to_json(r.times);
    Json pts = Json::array();
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        Json p;
        p["index"] = i;
        p["x"] = to_json(r.points[i]);
        p["residuals"] = to_json(r.residuals[i]);
        p["factors"] = to_json(r.factors[i]);
        pts.push_back(p);
    }
    j["points"] = pts;
    return j;
}

// ---------------------------------------------------------------------------

inline std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : ""; }

/// Flat projection with columns t, r, norm_inv, norm_beta, product, logvar_term.
inline std::string logvar_csv(const std::vector<LogVarReport>& rows) {
    std::ostringstream os;
    os << "t,r,norm_inv,norm_beta,product,logvar_term\n";
    for (const auto& lv : rows)
        for (std::size_t i = 0; i < lv.radii.size(); ++i)
            os << csv_number(lv.t) << ',' << csv_number(lv.radii[i]) << ',' << csv_number(lv.norm_inv[i]) << ','
               << csv_number(lv.norm_beta[i]) << ',' << csv_number(lv.product[i]) << ',' << csv_number(lv.term[i]) << '\n';
    return os.str();
}

/// Norm profile rows: t, r, norm (‖a‖_r or ‖ω⁻¹‖_r for inverse profiles).
inline std::string profile_csv(const NormProfile& p, double t) {
    std::ostringstream os;
    os << "t,r," << (p.inverse ? "norm_inv" : "norm") << "\n";
    for (std::size_t i = 0; i < p.radii.size(); ++i)
        os << csv_number(t) << ',' << csv_number(p.radii[i]) << ',' << csv_number(p.values[i]) << '\n';
    return os.str();
}

} // namespace moser
