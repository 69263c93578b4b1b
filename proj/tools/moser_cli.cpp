#include "moser/contact.hpp"
#include "moser/form_spec.hpp"
#include "moser/gallery.hpp"
#include "moser/path_method.hpp"
#include "moser/report.hpp"
#include "moser/stability.hpp"
#include "moser/suite.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace moser;

namespace {

enum ExitCode { kPass = 0, kCheckFailed = 1, kUserError = 2, kNumericalError = 3 };

class UserError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Option parsing helpers

struct Grid {
    double lo = 1.0;
    double hi = 1.0;
    int count = 1;
    bool log = false;
};

Grid parse_grid(const std::string& text, const std::string& spacing) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    if (parts.size() != 3 && parts.size() != 4) throw UserError("grid '" + text + "' must look like min:max:count[:lin|log]");
    Grid g;
    try {
        std::size_t used = 0;
        g.lo = std::stod(parts[0], &used);
        if (used != parts[0].size()) throw UserError("bad number");
        g.hi = std::stod(parts[1], &used);
        if (used != parts[1].size()) throw UserError("bad number");
        g.count = std::stoi(parts[2], &used);
        if (used != parts[2].size()) throw UserError("bad count");
    } catch (const std::exception&) {
        throw UserError("grid '" + text + "' must look like min:max:count[:lin|log]");
    }
    std::string sp = parts.size() == 4 ? parts[3] : spacing;
    if (sp == "log")
        g.log = true;
    else if (sp != "lin" && sp != "linear")
        throw UserError("grid spacing must be lin or log, got '" + sp + "'");
    if (g.count < 1 || !(g.lo > 0.0) || !(g.hi >= g.lo) || (g.count > 1 && g.hi == g.lo))
        throw UserError("grid '" + text + "' needs 0 < min < max and count ≥ 1");
    return g;
}

std::vector<double> grid_values(const Grid& g) {
    return g.log ? detail::log_grid(g.lo, g.hi, g.count) : detail::uniform_grid(g.lo, g.hi, g.count);
}

Json grid_json(const Grid& g) {
    Json j;
    j["min"] = g.lo;
    j["max"] = g.hi;
    j["count"] = g.count;
    j["spacing"] = g.log ? "log" : "lin";
    return j;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw UserError("");
        } catch (const std::exception&) {
            throw UserError(std::string(what) + ": '" + item + "' is not a number");
        }
    }
    if (out.empty()) throw UserError(std::string(what) + " is empty");
    return out;
}

struct Shell {
    double inner = 0.0;
    double outer = 1.0;
};

Shell parse_shell(const std::string& text) {
    const auto v = parse_list(text.find(':') != std::string::npos ? text.substr(0, text.find(':')) + "," + text.substr(text.find(':') + 1) : text,
                              "--shell");
    if (v.size() != 2 || !(v[0] >= 0.0) || !(v[1] > v[0])) throw UserError("--shell must be inner:outer with 0 ≤ inner < outer");
    return {v[0], v[1]};
}

// ---------------------------------------------------------------------------
// Inputs: form specs or gallery references

struct Overrides {
    std::optional<double> p, c, kappa;
    std::optional<int> n;
};

struct Input {
    TimeForm family;
    std::optional<TimeForm> sigma;
    std::optional<GalleryCase> gallery;
    std::string form = "family";
    Json params = Json::object();
};

double param(const nlohmann::json& params, const char* key, std::optional<double> override_value, double fallback) {
    if (override_value) return *override_value;
    if (params.contains(key)) {
        if (!params[key].is_number()) throw SchemaError(std::string("gallery parameter \"") + key + "\" must be a number");
        return params[key].get<double>();
    }
    return fallback;
}

Input load_gallery(const nlohmann::json& doc, const Overrides& ov) {
    for (const auto& [key, _] : doc.items())
        if (key != "gallery" && key != "form" && key != "params") throw SchemaError("unknown gallery reference field \"" + key + "\"");
    if (!doc["gallery"].is_string()) throw SchemaError("\"gallery\" must be a string");
    const std::string name = doc["gallery"].get<std::string>();
    const nlohmann::json params = doc.contains("params") ? doc["params"] : nlohmann::json::object();
    if (!params.is_object()) throw SchemaError("\"params\" must be an object");
    Input in;
    in.form = doc.contains("form") ? doc["form"].get<std::string>() : "family";
    GalleryCase g;
    if (name == "radial_pullback") {
        g = case_radial_pullback(param(params, "p", ov.p, 2.0), param(params, "c", ov.c, 0.5));
    } else if (name == "liouville_rotation") {
        g = case_liouville_rotation(param(params, "p", ov.p, 2.0), param(params, "kappa", ov.kappa, 1.0));
    } else if (name == "product") {
        const int n = ov.n ? *ov.n : static_cast<int>(param(params, "n", std::nullopt, 2.0));
        std::vector<double> a(static_cast<std::size_t>(std::max(n, 0)), 1.0);
        if (params.contains("a")) a = params["a"].get<std::vector<double>>();
        g = case_product(n, a);
    } else if (name == "shrinking") {
        g = case_shrinking_form();
    } else if (name == "inversion_chart") {
        g = case_inversion_chart();
    } else {
        throw SchemaError("unknown gallery case \"" + name + "\"");
    }
    in.params = Json::object();
    for (const auto& [k, v] : g.params) in.params[k] = v;
    if (in.form == "family") {
        in.family = g.omega;
        in.sigma = g.sigma;
    } else if (in.form == "omega") {
        in.family = TimeForm::constant(g.omega.at(0.0));
    } else if (in.form == "dsigma") {
        in.family = TimeForm::constant(g.omega.time_derivative().at(0.0));
    } else if (in.form == "sigma") {
        if (!g.sigma) throw SchemaError("gallery case \"" + name + "\" has no primitive");
        in.family = *g.sigma;
    } else {
        throw SchemaError("\"form\" must be one of family, omega, dsigma, sigma");
    }
    in.gallery = std::move(g);
    return in;
}

Input load_input(const std::string& path, const Overrides& ov, bool normalize) {
    const nlohmann::json doc = parse_json_text(read_text_file(path));
    if (doc.is_object() && doc.contains("gallery")) return load_gallery(doc, ov);
    if (ov.p || ov.c || ov.n || ov.kappa) throw UserError("--p, --c, --n and --kappa apply to gallery references only");
    Input in;
    in.family = load_form_spec(doc, {normalize});
    return in;
}

// ---------------------------------------------------------------------------
// Output

struct Output {
    std::string out;
    std::string format;

    void emit(const std::string& content) const {
        if (out.empty() || out == "-")
            std::cout << content;
        else
            write_atomic(out, content);
    }
};

std::string resolve_format(const Output& o, const std::string& fallback) {
    std::string f = o.format;
    if (f.empty()) {
        const std::string ext = fs::path(o.out).extension().string();
        f = ext == ".json" ? "json" : ext == ".csv" ? "csv" : fallback;
    }
    if (f != "json" && f != "csv") throw UserError("--format must be json or csv");
    return f;
}

struct Common {
    std::uint64_t seed = 1;
    std::size_t samples = 4096;
    std::string norm = "l1_operator";
    Output output;
    Overrides overrides;
    bool normalize = false;

    SamplerSpec sampler() const {
        SamplerSpec s{seed, samples};
        s.validate();
        return s;
    }
    NormKind norm_kind() const { return parse_norm_kind(norm); }
};

void add_common(CLI::App* cmd, Common& c, bool params = true) {
    cmd->add_option("--seed", c.seed, "sampler seed")->capture_default_str();
    cmd->add_option("--samples", c.samples, "sphere sample count")->capture_default_str();
    cmd->add_option("--norm", c.norm, "l1_operator | l2_frobenius | l2_operator")->capture_default_str();
    cmd->add_option("-o,--out", c.output.out, "output path (stdout when omitted)");
    cmd->add_option("--format", c.output.format, "json | csv");
    cmd->add_flag("--normalize-indices", c.normalize, "fold non-increasing spec indices with their permutation sign");
    if (params) {
        cmd->add_option("--p", c.overrides.p, "gallery parameter p");
        cmd->add_option("--c", c.overrides.c, "gallery parameter c");
        cmd->add_option("--n", c.overrides.n, "gallery parameter n");
        cmd->add_option("--kappa", c.overrides.kappa, "gallery parameter kappa");
    }
}

struct IntegratorOpts {
    IntegratorSpec spec;
    void add(CLI::App* cmd) {
        cmd->add_option("--rtol", spec.rel_tol, "relative step tolerance")->capture_default_str();
        cmd->add_option("--atol", spec.abs_tol, "absolute step tolerance")->capture_default_str();
        cmd->add_option("--max-steps", spec.max_steps, "step limit")->capture_default_str();
        cmd->add_option("--escape-radius", spec.escape_radius, "escape threshold on |x|")->capture_default_str();
        cmd->add_option("--min-step", spec.min_step, "smallest admissible step")->capture_default_str();
    }
};

RadialChart chart_for(const Input& in, const std::string& chart) {
    if (chart == "euclidean") return RadialChart::euclidean;
    if (chart == "cylindrical_log") return RadialChart::cylindrical_log;
    if (!chart.empty()) throw UserError("--chart must be euclidean or cylindrical_log");
    return in.gallery ? in.gallery->chart : RadialChart::euclidean;
}

TimeForm resolve_sigma(const Input& in, const std::string& sigma_path, const std::string& primitive, const Common& c) {
    if (!sigma_path.empty() && !primitive.empty()) throw UserError("give either --sigma or --primitive, not both");
    if (!sigma_path.empty()) {
        Input s = load_input(sigma_path, c.overrides, c.normalize);
        if (s.gallery && s.form == "family") {
            if (!s.sigma) throw UserError("gallery reference in --sigma has no primitive");
            return *s.sigma;
        }
        return s.family;
    }
    if (primitive == "euler") {
        SingularSet singular = in.gallery ? in.gallery->singular : SingularSet{};
        return euler_primitive(in.family.time_derivative(), {}, singular);
    }
    if (!primitive.empty()) throw UserError("--primitive supports only 'euler'");
    if (in.sigma) return *in.sigma;
    throw UserError("this command needs --sigma FILE or --primitive euler");
}

std::vector<Point> sample_points(int m, const Input& in, std::size_t count, std::uint64_t seed, const std::string& shell,
                                 double radius) {
    if (count == 0) throw UserError("--points must be positive");
    if (!shell.empty()) {
        const Shell s = parse_shell(shell);
        return shell_points(m, s.inner, s.outer, {seed, count});
    }
    if (radius > 0.0) return ball_points(m, radius, {seed, count});
    if (in.gallery) return in.gallery->region.sample(m, {seed, count});
    return ball_points(m, 1.0, {seed, count});
}

std::vector<double> time_grid(int count) {
    if (count < 1) throw UserError("--times must be at least 1");
    return count == 1 ? std::vector<double>{1.0} : unit_time_grid(count);
}

// ---------------------------------------------------------------------------
// Commands

int cmd_norms(const Common& c, const std::string& spec, const std::string& r, const std::string& spacing, double t,
              bool inverse, bool check_bound) {
    const Input in = load_input(spec, c.overrides, c.normalize);
    const Grid grid = parse_grid(r, spacing);
    const auto radii = grid_values(grid);
    const SamplerSpec sampler = c.sampler();
    const NormKind kind = c.norm_kind();

    std::vector<double> bound;
    if (check_bound) {
        if (!in.gallery || in.gallery->name != "radial_pullback" || (in.form != "omega" && in.form != "dsigma"))
            throw UserError("--check-bound needs a radial_pullback reference with form omega or dsigma");
        if (kind != NormKind::l1_operator) throw UserError("--check-bound compares ℓ¹ operator norms");
        if (grid.lo < 1.2) throw UserError("the published bounds are checked for r ≥ 1.2");
        const double p = in.gallery->params.at("p"), cc = in.gallery->params.at("c");
        inverse = in.form == "omega";
        for (double x : radii)
            bound.push_back(inverse ? (2.0 - 1.0 / p) * std::pow(x, 2.0 - 2.0 * p)
                                    : cc * p / (2.0 * p - 1.0) * std::pow(x, 2.0 * p - 2.0));
    }
    const KForm a = in.family.at(t);
    const NormProfile prof = inverse ? inverse_norm_profile(a, radii, sampler, kind, chart_for(in, ""))
                                     : norm_profile(a, radii, sampler, kind, chart_for(in, ""));
    bool within = true;
    std::vector<double> ratio;
    for (std::size_t i = 0; i < bound.size(); ++i) {
        ratio.push_back(prof.values[i] / bound[i]);
        within = within && ratio.back() <= 1.001;
    }

    if (resolve_format(c.output, "csv") == "csv") {
        std::string csv = profile_csv(prof, t);
        if (check_bound) {
            std::ostringstream os;
            os << "t,r,norm_inv,bound,ratio\n";
            for (std::size_t i = 0; i < radii.size(); ++i)
                os << csv_number(t) << ',' << csv_number(radii[i]) << ',' << csv_number(prof.values[i]) << ','
                   << csv_number(bound[i]) << ',' << csv_number(ratio[i]) << '\n';
            csv = os.str();
            if (in.form == "dsigma") csv.replace(csv.find("norm_inv"), 8, "norm");
        }
        c.output.emit(csv);
    } else {
        Json j = report_header("norms");
        j["spec"] = spec;
        j["params"] = in.params;
        j["t"] = t;
        j["grid"] = grid_json(grid);
        j["profile"] = to_json(prof);
        if (check_bound) {
            j["bound"] = to_json(bound);
            j["ratio"] = to_json(ratio);
            j["bound_slack"] = 1.001;
            j["verdict"] = within ? "pass" : "fail";
        }
        c.output.emit(to_json_text(j));
    }
    return within ? kPass : kCheckFailed;
}

int cmd_logvar(const Common& c, const std::string& spec, const std::string& r, const std::string& spacing, double r_max,
               int t_nodes, const std::string& sweep, const std::string& chart) {
    const Input in = load_input(spec, c.overrides, c.normalize);
    if (in.family.degree() != 2) throw UserError("logvar needs a family of 2-forms");
    if (t_nodes < 3 || t_nodes % 2 == 0) throw UserError("--t-nodes must be odd and at least 3");
    const Grid grid = parse_grid(r, spacing);
    LogVarOptions opt;
    opt.norm_kind = c.norm_kind();
    opt.chart = chart_for(in, chart);
    std::vector<double> sweep_r;
    if (!sweep.empty()) sweep_r = parse_list(sweep, "--sweep");
    opt.r_max = sweep_r.empty() ? r_max : std::max(r_max, *std::max_element(sweep_r.begin(), sweep_r.end()));
    const TotalLogVarReport rep = total_log_variation(in.family, grid_values(grid), c.sampler(), opt, t_nodes);

    std::vector<double> totals;
    for (double rm : sweep_r) totals.push_back(truncated_total(rep, rm));

    if (resolve_format(c.output, "csv") == "csv") {
        c.output.emit(logvar_csv(rep.per_time));
    } else {
        Json j = report_header("logvar");
        j["spec"] = spec;
        j["params"] = in.params;
        j["grid"] = grid_json(grid);
        j["sampler"] = to_json(c.sampler());
        j["r_max"] = rep.r_max;
        j["report"] = to_json(rep);
        if (!sweep_r.empty()) {
            Json s;
            s["r_max"] = to_json(sweep_r);
            s["total"] = to_json(totals);
            bool increasing = true;
            for (std::size_t i = 1; i < totals.size(); ++i) increasing = increasing && totals[i] > totals[i - 1];
            s["strictly_increasing"] = increasing;
            if (sweep_r.size() >= 2 && std::all_of(totals.begin(), totals.end(), [](double v) { return v > 0.0; }))
                s["loglog_slope"] = loglog_slope(sweep_r, totals);
            j["sweep"] = s;
        }
        c.output.emit(to_json_text(j));
    }
    return kPass;
}

int cmd_flow(const Common& c, const IntegratorOpts& io, const std::string& spec, const std::string& sigma_path,
             const std::string& primitive, const std::string& x0_text, double t1, const std::string& stops_text) {
    const Input in = load_input(spec, c.overrides, c.normalize);
    const TimeForm sigma = resolve_sigma(in, sigma_path, primitive, c);
    const auto xs = parse_list(x0_text, "--x0");
    if (static_cast<int>(xs.size()) != in.family.dim())
        throw UserError("--x0 needs " + std::to_string(in.family.dim()) + " coordinates");
    const Point x0 = Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
    FlowWindow w{0.0, t1, {}};
    if (!(t1 >= 0.0 && t1 <= 1.0)) throw UserError("--t1 must lie in [0, 1]");
    if (!stops_text.empty()) w.stops = parse_list(stops_text, "--stops");
    const FlowRecord rec = integrate_flow(build_moser_field(in.family, sigma), x0, io.spec, w);

    if (resolve_format(c.output, "json") == "csv") {
        std::ostringstream os;
        os << "t";
        for (int i = 0; i < in.family.dim(); ++i) os << ",x" << i + 1;
        os << "\n";
        for (std::size_t k = 0; k < rec.times.size(); ++k) {
            os << csv_number(rec.times[k]);
            for (Eigen::Index i = 0; i < rec.points[k].size(); ++i) os << ',' << csv_number(rec.points[k][i]);
            os << "\n";
        }
        c.output.emit(os.str());
    } else {
        Json j = report_header("flow");
        j["spec"] = spec;
        j["params"] = in.params;
        j["integrator"] = to_json(io.spec);
        j["x0"] = to_json(x0);
        j["flow"] = to_json(rec, true);
        c.output.emit(to_json_text(j));
    }
    return rec.status == FlowStatus::completed ? kPass : kCheckFailed;
}

int cmd_verify(const Common& c, const IntegratorOpts& io, const std::string& spec, const std::string& sigma_path,
               const std::string& primitive, std::size_t points, const std::string& shell, double radius, int times,
               double tol, bool keep_flows) {
    const Input in = load_input(spec, c.overrides, c.normalize);
    if (in.family.degree() != 2) throw UserError("verify needs a family of 2-forms");
    const TimeForm sigma = resolve_sigma(in, sigma_path, primitive, c);
    const auto pts = sample_points(in.family.dim(), in, points, c.seed, shell, radius);
    VerifyOptions opt;
    opt.integrator = io.spec;
    opt.norm_kind = c.norm_kind();
    opt.keep_flows = keep_flows;
    const VerificationReport rep = verify_strong_isotopy(in.family, sigma, pts, time_grid(times), tol, opt);
    Json j = report_header("verify");
    j["spec"] = spec;
    j["params"] = in.params;
    j["integrator"] = to_json(io.spec);
    j["seed"] = c.seed;
    j["report"] = to_json(rep);
    c.output.emit(to_json_text(j));
    std::cerr << "verify: max residual " << format_double(rep.max_residual) << " (tolerance " << format_double(tol) << "), "
              << (rep.pass ? "pass" : "fail") << "\n";
    return rep.pass ? kPass : kCheckFailed;
}

int cmd_contact_verify(const Common& c, const IntegratorOpts& io, const std::string& spec, std::size_t points,
                       double radius, int times, double tol, double rate_tol, bool no_rate) {
    const Input in = load_input(spec, c.overrides, c.normalize);
    const ContactFamily fam(in.family);
    GrayOptions opt;
    opt.integrator = io.spec;
    opt.check_rate = !no_rate;
    opt.rate_tolerance = rate_tol;
    if (points == 0) throw UserError("--points must be positive");
    const auto pts = ball_points(fam.dim(), radius, {c.seed, points});
    const GrayReport rep = verify_contact_isotopy(fam, pts, time_grid(times), tol, opt);
    Json j = report_header("contact-verify");
    j["spec"] = spec;
    j["integrator"] = to_json(io.spec);
    j["seed"] = c.seed;
    j["report"] = to_json(rep);
    c.output.emit(to_json_text(j));
    std::cerr << "contact-verify: collinearity " << format_double(rep.max_residual) << ", min factor "
              << format_double(rep.min_factor) << ", " << (rep.pass ? "pass" : "fail") << "\n";
    return rep.pass ? kPass : kCheckFailed;
}

int cmd_example(const Common& c, const IntegratorOpts& io, const std::string& name, bool no_verify) {
    SuiteConfig cfg;
    cfg.sampler = c.sampler();
    cfg.integrator = io.spec;
    const Overrides& ov = c.overrides;
    SuiteResult s;
    if (name == "shrinking") {
        s = run_shrinking_suite(cfg);
    } else if (name == "radial_pullback") {
        s = run_radial_pullback_suite(ov.p.value_or(2.0), ov.c.value_or(0.5), cfg, !no_verify);
    } else if (name == "liouville_rotation") {
        s = run_liouville_suite(ov.p.value_or(2.0), cfg, ov.kappa.value_or(1.0));
    } else if (name == "inversion_chart") {
        s = run_inversion_suite(cfg);
    } else if (name == "product") {
        const int n = ov.n.value_or(2);
        if (n < 1) throw UserError("--n must be positive");
        s = run_product_suite(n, std::vector<double>(static_cast<std::size_t>(n), 1.0), cfg);
    } else if (name == "contact") {
        s = run_contact_suite(cfg);
    } else {
        std::string known;
        for (const auto& g : gallery_names()) known += " " + g;
        throw UserError("unknown example '" + name + "'; known:" + known + " contact");
    }
    const fs::path dir = c.output.out.empty() ? fs::path("example_" + name) : fs::path(c.output.out);
    fs::create_directories(dir);
    for (const auto& [key, doc] : s.artifacts) {
        Json j = report_header("example");
        j["case"] = s.name;
        j["artifact"] = key;
        j["data"] = doc;
        write_atomic(dir / (key + ".json"), to_json_text(j));
    }
    write_atomic(dir / "timings.json", to_json_text(timings_json(s)));
    write_atomic(dir / "summary.json", to_json_text(summary_json(s)));
    for (const auto& chk : s.checks)
        std::cout << (chk.pass ? "PASS " : "FAIL ") << chk.name << " " << format_double(chk.value) << " " << chk.relation
                  << " " << format_double(chk.threshold) << (chk.gating ? "" : " (diagnostic)")
                  << (chk.note.empty() ? "" : " [" + chk.note + "]") << "\n";
    std::cout << s.name << ": " << (s.pass() ? "pass" : "fail") << " (" << dir.string() << ")\n";
    return s.pass() ? kPass : kCheckFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Moser path method toolkit: norms, log-variation, flows and isotopy verification"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (overrides MOSER_THREADS)");

    Common common;
    IntegratorOpts io;
    std::string spec, sigma, primitive, r, spacing = "lin", sweep, chart, x0, stops, shell, name;
    double t = 0.0, r_max = 64.0, t1 = 1.0, radius = 0.0, tol = 1e-6, rate_tol = 1e-4;
    int t_nodes = 33, times = 11;
    std::size_t points = 100;
    bool inverse = false, check_bound = false, keep_flows = false, no_rate = false, no_verify = false;

    auto* norms = app.add_subcommand("norms", "sphere sup-norm profile of a form");
    add_common(norms, common);
    norms->add_option("--spec", spec, "form spec or gallery reference (JSON)")->required();
    norms->add_option("--r", r, "radius grid min:max:count[:lin|log]")->required();
    norms->add_option("--spacing", spacing, "lin | log")->capture_default_str();
    norms->add_option("--t", t, "time at which a family is evaluated")->capture_default_str();
    norms->add_flag("--inverse", inverse, "profile of the inverse 2-form");
    norms->add_flag("--check-bound", check_bound, "compare against the published radial_pullback bounds");

    auto* logvar = app.add_subcommand("logvar", "log-variation profile and total along a family");
    add_common(logvar, common);
    logvar->add_option("--spec", spec, "family spec or gallery reference")->required();
    logvar->add_option("--r", r, "radius grid min:max:count[:lin|log]")->required();
    logvar->add_option("--spacing", spacing, "lin | log")->capture_default_str();
    logvar->add_option("--r-max", r_max, "truncation radius")->capture_default_str();
    logvar->add_option("--t-nodes", t_nodes, "Simpson nodes in t (odd)")->capture_default_str();
    logvar->add_option("--sweep", sweep, "comma-separated truncation radii for a divergence table");
    logvar->add_option("--chart", chart, "euclidean | cylindrical_log");

    auto* flow = app.add_subcommand("flow", "integrate one Moser flow line");
    add_common(flow, common);
    io.add(flow);
    flow->add_option("--spec", spec, "family spec or gallery reference")->required();
    flow->add_option("--sigma", sigma, "primitive family spec");
    flow->add_option("--primitive", primitive, "euler: radial primitive of the time derivative");
    flow->add_option("--x0", x0, "start point, comma-separated")->required();
    flow->add_option("--t1", t1, "end time")->capture_default_str();
    flow->add_option("--stops", stops, "comma-separated times to hit exactly");

    auto* verify = app.add_subcommand("verify", "check the pullback identity along Moser flows");
    add_common(verify, common);
    io.add(verify);
    verify->add_option("--spec", spec, "family spec or gallery reference")->required();
    verify->add_option("--sigma", sigma, "primitive family spec");
    verify->add_option("--primitive", primitive, "euler: radial primitive of the time derivative");
    verify->add_option("--points", points, "sample points")->capture_default_str();
    verify->add_option("--shell", shell, "sample the shell inner:outer");
    verify->add_option("--radius", radius, "sample the ball of this radius");
    verify->add_option("--times", times, "uniform time grid size on [0, 1]")->capture_default_str();
    verify->add_option("--tol", tol, "residual tolerance")->capture_default_str();
    verify->add_flag("--keep-flows", keep_flows, "include per-point flow summaries");

    auto* contact = app.add_subcommand("contact-verify", "check the conformal pullback identity for contact forms");
    add_common(contact, common, false);
    io.add(contact);
    contact->add_option("--spec", spec, "degree-1 family spec")->required();
    contact->add_option("--points", points, "sample points")->capture_default_str();
    contact->add_option("--radius", radius, "sample the ball of this radius");
    contact->add_option("--times", times, "uniform time grid size on [0, 1]")->capture_default_str();
    contact->add_option("--tol", tol, "collinearity tolerance")->capture_default_str();
    contact->add_option("--rate-tol", rate_tol, "tolerance of the log-factor rate cross-check")->capture_default_str();
    contact->add_flag("--no-rate", no_rate, "skip the rate cross-check");

    auto* example = app.add_subcommand("example", "run a gallery case's full check suite");
    add_common(example, common);
    io.add(example);
    example->add_option("name", name, "product | radial_pullback | liouville_rotation | shrinking | inversion_chart | contact")
        ->required();
    example->add_flag("--no-verify", no_verify, "skip flow verification where optional");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kUserError;
    }
    if (threads > 0) ::setenv("MOSER_THREADS", std::to_string(threads).c_str(), 1);

    try {
        if (*norms) return cmd_norms(common, spec, r, spacing, t, inverse, check_bound);
        if (*logvar) return cmd_logvar(common, spec, r, spacing, r_max, t_nodes, sweep, chart);
        if (*flow) return cmd_flow(common, io, spec, sigma, primitive, x0, t1, stops);
        if (*verify) return cmd_verify(common, io, spec, sigma, primitive, points, shell, radius, times, tol, keep_flows);
        if (*contact)
            return cmd_contact_verify(common, io, spec, points, radius > 0.0 ? radius : 2.0, times, tol, rate_tol, no_rate);
        if (*example) return cmd_example(common, io, name, no_verify);
    } catch (const SingularForm& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kNumericalError;
    } catch (const PrimitiveMismatch& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kNumericalError;
    } catch (const MissingBasePrimitive& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kNumericalError;
    } catch (const EvaluationError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kNumericalError;
    } catch (const QuadratureError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kNumericalError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUserError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUserError;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUserError;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kNumericalError;
    }
    return kUserError;
}
