#include "compfade/cli.hpp"

#include "compfade/curves.hpp"
#include "compfade/errors.hpp"
#include "compfade/mc.hpp"
#include "compfade/model.hpp"
#include "compfade/numerics.hpp"
#include "compfade/validation.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace compfade::cli {
namespace {

struct RunConfig {
    std::string model;
    std::optional<double> alpha, kappa, mu, m, b, omega, rhat;
    std::string grid;
    std::string format = "csv";
    std::string out;
    std::uint64_t seed = 1;
    std::size_t count = 10000;
    int series_n = 40;
    std::size_t max_terms = 5000;
    double series_rel_tol = 1e-8;
    bool use_gross = false;
    bool oracle = false;
    bool strict = false;
    unsigned threads = 1;
    std::string config_path;

    int figure_id = 0;
    std::string out_dir = ".";
    std::string orders = "0,1,2,3,4";
    std::string report;
    unsigned partitions = 1;
    std::string level = "quick";
    bool inject_fault = false;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StrictFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

const std::vector<std::string> kModels = {"akm",           "am",           "extreme",   "akm-gamma",        "am-gamma",
                                          "extreme-gamma", "gamma-shadow", "kmu-gamma", "kmu-extreme-gamma"};

double need(const std::optional<double>& v, const char* flag, const std::string& model) {
    if (!v) throw UsageError("model '" + model + "' needs " + flag);
    return *v;
}

Model build_model(const RunConfig& c) {
    if (c.model.empty()) throw UsageError("--model is required");
    const std::string& name = c.model;
    std::map<std::string, bool> used = {{"--alpha", false}, {"--kappa", false}, {"--mu", false}, {"--m", false},
                                        {"--b", false},     {"--omega", false}, {"--rhat", false}};
    auto get = [&](const std::optional<double>& v, const char* flag) {
        used[flag] = true;
        return need(v, flag, name);
    };
    auto rhat = [&] {
        used["--rhat"] = true;
        return RmsScale(c.rhat.value_or(1.0));
    };
    auto shadow = [&] {
        const double b = get(c.b, "--b");
        return GammaShadowParams(b, get(c.omega, "--omega"));
    };
    auto alpha_two = [&] {
        used["--alpha"] = true;
        if (c.alpha && *c.alpha != 2.0) throw UsageError("model '" + name + "' fixes --alpha at 2");
        return 2.0;
    };
    std::optional<Model> model;
    if (name == "akm") {
        const double a = get(c.alpha, "--alpha");
        const double k = get(c.kappa, "--kappa");
        model = MultipathModel{AkmParams(a, k, get(c.mu, "--mu")), rhat()};
    } else if (name == "am") {
        const double a = get(c.alpha, "--alpha");
        model = MultipathModel{AmParams(a, get(c.mu, "--mu")), rhat()};
    } else if (name == "extreme") {
        const double a = get(c.alpha, "--alpha");
        model = MultipathModel{ExtremeParams(a, get(c.m, "--m")), rhat()};
    } else if (name == "gamma-shadow") {
        model = shadow();
    } else if (name == "akm-gamma" || name == "kmu-gamma") {
        const double a = name == "kmu-gamma" ? alpha_two() : get(c.alpha, "--alpha");
        const double k = get(c.kappa, "--kappa");
        const AkmParams p(a, k, get(c.mu, "--mu"));
        model = CompositeModel{p, shadow()};
    } else if (name == "am-gamma") {
        const double a = get(c.alpha, "--alpha");
        const AmParams p(a, get(c.mu, "--mu"));
        model = CompositeModel{p, shadow()};
    } else if (name == "extreme-gamma" || name == "kmu-extreme-gamma") {
        const double a = name == "kmu-extreme-gamma" ? alpha_two() : get(c.alpha, "--alpha");
        const ExtremeParams p(a, get(c.m, "--m"));
        model = CompositeModel{p, shadow()};
    } else {
        throw UsageError("unknown model '" + name + "'");
    }
    const std::map<std::string, const std::optional<double>*> given = {
        {"--alpha", &c.alpha}, {"--kappa", &c.kappa}, {"--mu", &c.mu},    {"--m", &c.m},
        {"--b", &c.b},         {"--omega", &c.omega}, {"--rhat", &c.rhat}};
    for (const auto& [flag, value] : given) {
        if (value->has_value() && !used[flag]) throw UsageError(flag + " does not apply to model '" + name + "'");
    }
    return *model;
}

curves::EvalOptions eval_options(const RunConfig& c) {
    curves::EvalOptions e;
    if (c.series_n < 1) throw UsageError("--series-n must be >= 1");
    if (!(c.series_rel_tol > 0.0)) throw UsageError("--series-rel-tol must be > 0");
    e.series.n = c.series_n;
    e.series.max_terms = c.max_terms;
    e.series.rel_tol = c.series_rel_tol;
    e.series.use_gross = c.use_gross;
    e.oracle = c.oracle;
    e.threads = std::max(1u, c.threads);
    return e;
}

// Writes to --out when given, else to the command's standard stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw UsageError("cannot open '" + path + "' for writing");
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : fallback_; }

private:
    std::ofstream file_;
    std::ostream& fallback_;
};

void emit_table(const curves::CurveTable& t, const RunConfig& c, std::ostream& out) {
    if (c.format == "json") {
        out << curves::to_json(t).dump(2) << '\n';
    } else {
        curves::write_csv(t, out);
    }
}

nlohmann::json tagged_descriptor(const Model& m, const RunConfig& c) {
    auto j = describe(m);
    j["model"] = c.model;
    return j;
}

int cmd_curve(const RunConfig& c, std::ostream& out, bool cdf) {
    if (c.grid.empty()) throw UsageError("--grid min:max:points is required");
    const Model model = build_model(c);
    const auto xs = curves::make_grid(curves::parse_grid(c.grid));
    const auto options = eval_options(c);
    auto table = cdf ? curves::cdf_table(model, xs, options) : curves::pdf_table(model, xs, options);
    table.model_descriptor = tagged_descriptor(model, c);
    Sink sink(c.out, out);
    emit_table(table, c, sink.stream());
    return kOk;
}

std::vector<double> parse_orders(const std::string& text) {
    std::vector<double> orders;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw UsageError("--orders: not a number '" + item + "'");
        }
        if (used != item.size() || !(v >= 0.0)) throw UsageError("--orders: need non-negative numbers");
        orders.push_back(v);
    }
    if (orders.empty()) throw UsageError("--orders is empty");
    return orders;
}

int cmd_moments(const RunConfig& c, std::ostream& out) {
    if (c.model != "akm") throw UsageError("moments needs --model akm (composite moments are not tabulated)");
    const Model model = build_model(c);
    const auto& mm = std::get<MultipathModel>(model);
    const AkmParams& p = std::get<AkmParams>(mm.params);
    const double rhat = mm.rhat.value();
    constexpr double kTol = 1e-6;
    nlohmann::json rows = nlohmann::json::array();
    bool ok = true;
    for (const double l : parse_orders(c.orders)) {
        const double closed = channel::akm_moment(p, l) * std::pow(rhat, l);
        numerics::QuadratureOptions q;
        q.rel_tol = 1e-12;
        q.abs_tol = 0.0;
        q.initial_intervals = 16;
        const auto r = numerics::integrate_semi_infinite(
            [&](double rho) {
                const double f = channel::akm_pdf_normalized(p, rho);
                return f == 0.0 ? 0.0 : std::pow(rho, l) * f;
            },
            q);
        const double quad = numerics::require_converged(r, "moment quadrature") * std::pow(rhat, l);
        const double diff = std::fabs(closed - quad) / std::fabs(quad);
        ok = ok && diff <= kTol;
        rows.push_back({{"l", l}, {"closed_form", closed}, {"quadrature", quad}, {"rel_diff", diff}});
    }
    Sink sink(c.out, out);
    auto& s = sink.stream();
    if (c.format == "json") {
        s << nlohmann::json{{"model", tagged_descriptor(model, c)}, {"tolerance", kTol}, {"rows", rows}}.dump(2)
          << '\n';
    } else {
        s << "l,closed_form,quadrature,rel_diff\n";
        char buf[128];
        for (const auto& row : rows) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", row["l"].get<double>(),
                          row["closed_form"].get<double>(), row["quadrature"].get<double>(),
                          row["rel_diff"].get<double>());
            s << buf;
        }
    }
    if (c.strict && !ok) throw StrictFailure("moment closed form and quadrature differ by more than 1e-6");
    return kOk;
}

int cmd_figure(const RunConfig& c, std::ostream& out) {
    const auto options = eval_options(c);
    const auto spec = curves::figure_spec(c.figure_id);
    const auto tables = curves::figure_curves(c.figure_id, options);
    std::filesystem::create_directories(c.out_dir);
    const std::string ext = c.format == "json" ? "json" : "csv";
    bool ok = true;
    nlohmann::json index = nlohmann::json::array();
    for (std::size_t i = 0; i < tables.size(); ++i) {
        auto t = tables[i];
        std::string label = spec.members[i].label;
        std::replace(label.begin(), label.end(), '=', '_');
        const auto path = std::filesystem::path(c.out_dir) / ("fig" + std::to_string(c.figure_id) + "_" + label + "." + ext);
        std::ofstream file(path, std::ios::binary);
        if (!file) throw UsageError("cannot open '" + path.string() + "' for writing");
        emit_table(t, c, file);
        const double mass = t.metadata["total_mass"].get<double>();
        const bool good = std::fabs(mass - 1.0) <= 1e-6 && t.metadata["nonnegative"].get<bool>();
        ok = ok && good;
        index.push_back({{"file", path.string()}, {"label", spec.members[i].label}, {"total_mass", mass},
                         {"nonnegative", t.metadata["nonnegative"]}, {"modes", t.metadata["modes"]}});
    }
    out << nlohmann::json{{"figure", c.figure_id},
                          {"family", spec.family},
                          {"sweep", {{"parameter", spec.sweep_parameter}, {"values", spec.sweep_values}}},
                          {"fixed", spec.fixed},
                          {"curves", index}}
               .dump(2)
        << '\n';
    if (c.strict && !ok) throw StrictFailure("a figure curve failed its mass or non-negativity check");
    return kOk;
}

int cmd_sample(const RunConfig& c, std::ostream& out, std::ostream& err) {
    if (c.count == 0) throw UsageError("--count must be >= 1");
    if (c.partitions == 0) throw UsageError("--partitions must be >= 1");
    const Model model = build_model(c);
    auto batch = mc::sample_partitioned(model, c.count, c.seed, c.partitions, std::max(1u, c.threads));
    batch.model_descriptor = tagged_descriptor(model, c).dump();
    {
        Sink sink(c.out, out);
        auto& s = sink.stream();
        char buf[40];
        for (const double v : batch.values) {
            std::snprintf(buf, sizeof buf, "%.17g\n", v);
            s << buf;
        }
    }
    const auto options = eval_options(c);
    const Density density = options.oracle ? reference_density(model) : model_density(model, options.series);
    mc::GofOptions g;
    g.scale = typical_scale(model);
    const auto r = mc::gof_compare(batch, density, g);
    const double atom_z = r.atom_standard_error > 0.0
                              ? std::fabs(r.atom_frequency_observed - r.atom_mass_expected) / r.atom_standard_error
                              : (r.atom_frequency_observed == r.atom_mass_expected ? 0.0 : INFINITY);
    const bool ks_ok = !r.ks_defined || r.ks_statistic <= r.ks_critical;
    const bool atom_ok = atom_z <= 5.0;
    nlohmann::json report = {{"model", nlohmann::json::parse(batch.model_descriptor)},
                             {"seed", batch.seed},
                             {"partitions", c.partitions},
                             {"sample_size", r.sample_size},
                             {"nonzero_count", r.nonzero_count},
                             {"ks_defined", r.ks_defined},
                             {"ks_statistic", r.ks_defined ? nlohmann::json(r.ks_statistic) : nlohmann::json(nullptr)},
                             {"ks_critical_0.001", r.ks_defined ? nlohmann::json(r.ks_critical) : nlohmann::json(nullptr)},
                             {"atom_frequency_observed", r.atom_frequency_observed},
                             {"atom_mass_expected", r.atom_mass_expected},
                             {"atom_standard_errors", atom_z},
                             {"passed", ks_ok && atom_ok}};
    if (!c.report.empty()) {
        Sink sink(c.report, err);
        sink.stream() << report.dump(2) << '\n';
    } else {
        err << report.dump(2) << '\n';
    }
    if (c.strict && !(ks_ok && atom_ok)) throw StrictFailure("goodness-of-fit check failed");
    return kOk;
}

int cmd_validate(const RunConfig& c, std::ostream& out, std::ostream& err, bool color) {
    validation::Options o;
    o.level = c.level == "full" ? validation::Level::full : validation::Level::quick;
    o.inject_kernel_sign_fault = c.inject_fault;
    o.threads = std::max(1u, c.threads);
    const auto report = validation::run(o);
    {
        Sink sink(c.out, out);
        sink.stream() << report.to_json().dump(2) << '\n';
    }
    if (report.all_passed()) return kOk;
    for (const auto& check : report.checks) {
        if (check.passed) continue;
        err << (color ? "\x1b[31mFAIL\x1b[0m " : "FAIL ") << "[" << check.criterion << "] " << check.name
            << ": measured " << check.measured << " > " << check.tolerance << " (" << check.detail << ")\n";
    }
    return kFailure;
}

// Fills options not given on the command line from a JSON object whose keys
// are the long flag names without dashes.
void apply_config_file(CLI::App& app, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw UsageError("config '" + path + "' must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        CLI::Option* opt = nullptr;
        for (CLI::App* scope : {&app}) {
            try {
                opt = scope->get_option("--" + key);
            } catch (const CLI::OptionNotFound&) {
            }
        }
        if (opt == nullptr) {
            for (auto* sub : app.get_subcommands({})) {
                if (!sub->parsed()) continue;
                try {
                    opt = sub->get_option("--" + key);
                } catch (const CLI::OptionNotFound&) {
                }
            }
        }
        if (opt == nullptr || key == "config") throw UsageError("config '" + path + "': unknown key '" + key + "'");
        if (opt->count() > 0) continue;  // the command line wins
        std::string text;
        if (value.is_string()) {
            text = value.get<std::string>();
        } else if (value.is_boolean()) {
            text = value.get<bool>() ? "true" : "false";
        } else if (value.is_number()) {
            text = value.dump();
        } else {
            throw UsageError("config '" + path + "': key '" + key + "' must be a scalar");
        }
        opt->add_result(text);
        opt->run_callback();
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool color) {
    RunConfig c;
    CLI::App app{"Composite fading distributions: densities, samplers and validation", "compfade"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_version_flag("--version", curves::kToolVersion);

    app.add_option("--model", c.model, "Distribution family")->check(CLI::IsMember(kModels));
    app.add_option("--alpha", c.alpha, "Non-linearity alpha > 0");
    app.add_option("--kappa", c.kappa, "Dominant-to-scattered power ratio kappa >= 0");
    app.add_option("--mu", c.mu, "Clustering parameter mu > 0");
    app.add_option("--m", c.m, "Extreme severity m > 0");
    app.add_option("--b", c.b, "Gamma shadow shape b > 0");
    app.add_option("--omega", c.omega, "Gamma shadow scale Omega > 0");
    app.add_option("--rhat", c.rhat, "rms envelope scale of a plain multipath model (default 1)");
    app.add_option("--grid", c.grid, "Abscissae as min:max:points");
    app.add_option("--format", c.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--out", c.out, "Output file (default stdout)");
    app.add_option("--seed", c.seed, "Random seed");
    app.add_option("--count", c.count, "Number of draws");
    app.add_option("--series-n", c.series_n, "Degree of the Gross polynomial surrogate");
    app.add_option("--max-terms", c.max_terms, "Cap on series terms");
    app.add_option("--series-rel-tol", c.series_rel_tol, "Series stopping tolerance");
    app.add_flag("--use-gross", c.use_gross, "Use the Gross polynomial coefficients");
    app.add_flag("--oracle", c.oracle, "Evaluate composites by the mixture integral");
    app.add_flag("--strict", c.strict, "Turn numerical check failures into exit status 1");
    app.add_option("--threads", c.threads, "Worker threads for grids and sampling");
    app.add_option("--config", c.config_path, "JSON file of flag values; flags given on the command line win");

    auto* pdf = app.add_subcommand("pdf", "Tabulate a density");
    auto* cdf = app.add_subcommand("cdf", "Tabulate a cumulative distribution");
    auto* moments = app.add_subcommand("moments", "Closed-form vs quadrature moments of the alpha-kappa-mu envelope");
    moments->add_option("--orders", c.orders, "Comma-separated moment orders");
    auto* figure = app.add_subcommand("figure", "Emit the curve family of a figure");
    figure->add_option("--id", c.figure_id, "Figure number")->required()->check(CLI::Range(1, 4));
    figure->add_option("--out-dir", c.out_dir, "Directory for the curve files");
    auto* sample = app.add_subcommand("sample", "Draw samples and test them against the density");
    sample->add_option("--report", c.report, "Goodness-of-fit report file (default stderr)");
    sample->add_option("--partitions", c.partitions, "Independent seed partitions");
    auto* validate = app.add_subcommand("validate", "Run the validation suite");
    validate->add_option("--level", c.level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
    validate->add_flag("--inject-kernel-fault", c.inject_fault, "Flip the sign of p inside the kernel integral");

    const auto diagnostic = [&](const std::string& what) {
        err << (color ? "\x1b[31merror:\x1b[0m " : "error: ") << what << '\n';
    };
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        if (!c.config_path.empty()) apply_config_file(app, c.config_path);
        if (pdf->parsed()) return cmd_curve(c, out, false);
        if (cdf->parsed()) return cmd_curve(c, out, true);
        if (moments->parsed()) return cmd_moments(c, out);
        if (figure->parsed()) return cmd_figure(c, out);
        if (sample->parsed()) return cmd_sample(c, out, err);
        if (validate->parsed()) return cmd_validate(c, out, err, color);
        return kUsage;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << curves::kToolVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        diagnostic(e.what());
        err << "run 'compfade --help' for usage\n";
        return kUsage;
    } catch (const UsageError& e) {
        diagnostic(e.what());
        return kUsage;
    } catch (const DomainError& e) {
        diagnostic(e.what());
        return kUsage;
    } catch (const StrictFailure& e) {
        diagnostic(e.what());
        return kFailure;
    } catch (const ConvergenceError& e) {
        diagnostic(e.what());
        return kFailure;
    } catch (const OverflowError& e) {
        diagnostic(e.what());
        return kFailure;
    } catch (const EvaluationError& e) {
        diagnostic(e.what());
        return kFailure;
    } catch (const std::exception& e) {
        diagnostic(e.what());
        return kFailure;
    }
}

}  // namespace compfade::cli
