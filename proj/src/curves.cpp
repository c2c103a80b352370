#include "compfade/curves.hpp"

#include "compfade/errors.hpp"
#include "compfade/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace compfade::curves {
namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const char* what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        detail::throw_domain(what, "not a number: '" + s + "'");
    }
    if (used != s.size()) detail::throw_domain(what, "not a number: '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(item);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

nlohmann::json base_metadata(const Model& m, const EvalOptions& options, const char* quantity) {
    nlohmann::json meta = {{"tool", "compfade"}, {"version", kToolVersion}, {"quantity", quantity}};
    if (std::holds_alternative<CompositeModel>(m)) {
        meta["path"] = options.oracle ? "mixture-quadrature" : "series";
        meta["series"] = {{"rel_tol", options.series.rel_tol},
                          {"max_terms", options.series.max_terms},
                          {"use_gross", options.series.use_gross},
                          {"n", options.series.n}};
        meta["mixture_rel_tol"] = composite::MixtureOptions{}.rel_tol;
        meta["kernel_rel_tol"] = KernelOptions{}.rel_tol;
    } else {
        meta["path"] = "closed-form";
    }
    return meta;
}

Density density_for(const Model& m, const EvalOptions& options) {
    if (options.oracle) return reference_density(m);
    return model_density(m, options.series);
}

std::vector<double> checked_abscissae(std::span<const double> xs) {
    std::vector<double> out(xs.begin(), xs.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!std::isfinite(out[i]) || out[i] < 0.0) detail::throw_domain("curve", "abscissae must be finite and >= 0");
        if (i > 0 && !(out[i] > out[i - 1])) detail::throw_domain("curve", "abscissae must be strictly increasing");
    }
    return out;
}

double plain_cdf(const Model& m, double x) {
    if (const auto* g = std::get_if<GammaShadowParams>(&m)) return channel::gamma_shadow_cdf(*g, x);
    const auto& mm = std::get<MultipathModel>(m);
    const double rho = x / mm.rhat.value();
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, AkmParams>) {
                return channel::akm_cdf(p, rho);
            } else if constexpr (std::is_same_v<T, AmParams>) {
                return channel::am_cdf(p, mm.rhat, x);
            } else {
                return channel::extreme_cdf(p, rho);
            }
        },
        mm.params);
}

}  // namespace

GridSpec parse_grid(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) detail::throw_domain("--grid", "expected min:max:points, got '" + text + "'");
    GridSpec g;
    g.min = parse_double(parts[0], "--grid");
    g.max = parse_double(parts[1], "--grid");
    const double points = parse_double(parts[2], "--grid");
    if (points != std::floor(points) || points < 2 || points > 1e7) {
        detail::throw_domain("--grid", "points must be an integer >= 2");
    }
    g.points = static_cast<std::size_t>(points);
    check_grid(g);
    return g;
}

void check_grid(const GridSpec& g) {
    if (!std::isfinite(g.min) || !std::isfinite(g.max) || !(g.min < g.max)) {
        detail::throw_domain("grid", "need finite min < max");
    }
    if (g.points < 2) detail::throw_domain("grid", "need at least 2 points");
    if (g.min < 0.0) detail::throw_domain("grid", "variates are non-negative; need min >= 0");
}

std::vector<double> make_grid(const GridSpec& g) {
    check_grid(g);
    std::vector<double> xs(g.points);
    const double step = (g.max - g.min) / static_cast<double>(g.points - 1);
    for (std::size_t i = 0; i < g.points; ++i) xs[i] = g.min + step * static_cast<double>(i);
    xs.back() = g.max;
    return xs;
}

void check_table(const CurveTable& t) {
    if (t.x.size() != t.values.size()) detail::throw_domain("curve table", "length mismatch");
    for (std::size_t i = 1; i < t.x.size(); ++i) {
        if (!(t.x[i] > t.x[i - 1])) detail::throw_domain("curve table", "abscissae not strictly increasing");
    }
}

CurveTable pdf_table(const Model& m, std::span<const double> xs, const EvalOptions& options) {
    CurveTable t;
    t.model_descriptor = describe(m);
    t.x = checked_abscissae(xs);
    t.metadata = base_metadata(m, options, "pdf");
    if (const auto* c = std::get_if<CompositeModel>(&m)) {
        t.values = composite::evaluate_curve(*c, t.x, options.series, options.oracle, options.threads);
        t.atoms = density_for(m, options).atoms;
    } else {
        const Density d = reference_density(m);
        t.values.reserve(t.x.size());
        for (const double x : t.x) t.values.push_back(d.continuous(x));
        t.atoms = d.atoms;
    }
    return t;
}

CurveTable cdf_table(const Model& m, std::span<const double> xs, const EvalOptions& options) {
    CurveTable t;
    t.model_descriptor = describe(m);
    t.x = checked_abscissae(xs);
    t.metadata = base_metadata(m, options, "cdf");
    const Density d = density_for(m, options);
    t.atoms = d.atoms;
    t.values.reserve(t.x.size());
    if (!std::holds_alternative<CompositeModel>(m)) {
        t.metadata["path"] = "closed-form";
        for (const double x : t.x) t.values.push_back(plain_cdf(m, x));
        return t;
    }
    numerics::QuadratureOptions q;
    q.rel_tol = 1e-10;
    q.abs_tol = 1e-14;
    q.initial_intervals = 2;
    const double atom = d.atom_mass();
    double acc = 0.0;
    double prev = 0.0;
    for (const double x : t.x) {
        acc += numerics::require_converged(numerics::integrate_interval(d.continuous, prev, x, q), "composite cdf");
        prev = x;
        t.values.push_back(std::clamp(acc + atom, 0.0, 1.0));
    }
    t.metadata["path"] = std::string("cumulative-quadrature/") + t.metadata["path"].get<std::string>();
    return t;
}

void write_csv(const CurveTable& t, std::ostream& out) {
    check_table(t);
    out << "x,value\n";
    for (std::size_t i = 0; i < t.x.size(); ++i) {
        out << format_double(t.x[i]) << ',' << format_double(t.values[i]) << '\n';
    }
    for (const auto& a : t.atoms) {
        out << "#atom," << format_double(a.location) << ',' << format_double(a.mass) << '\n';
    }
}

CurveTable read_csv(std::istream& in) {
    CurveTable t;
    std::string line;
    if (!std::getline(in, line) || line != "x,value") detail::throw_domain("read_csv", "missing x,value header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() == 3 && cells[0] == "#atom") {
            t.atoms.push_back({parse_double(cells[1], "read_csv"), parse_double(cells[2], "read_csv")});
        } else if (cells.size() == 2) {
            t.x.push_back(parse_double(cells[0], "read_csv"));
            t.values.push_back(parse_double(cells[1], "read_csv"));
        } else {
            detail::throw_domain("read_csv", "malformed row '" + line + "'");
        }
    }
    check_table(t);
    return t;
}

nlohmann::json to_json(const CurveTable& t) {
    check_table(t);
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& a : t.atoms) atoms.push_back({{"location", a.location}, {"mass", a.mass}});
    return {{"model", t.model_descriptor}, {"x", t.x}, {"values", t.values}, {"atoms", atoms}, {"metadata", t.metadata}};
}

CurveTable from_json(const nlohmann::json& j) {
    CurveTable t;
    t.model_descriptor = j.at("model");
    t.x = j.at("x").get<std::vector<double>>();
    t.values = j.at("values").get<std::vector<double>>();
    for (const auto& a : j.at("atoms")) t.atoms.push_back({a.at("location").get<double>(), a.at("mass").get<double>()});
    t.metadata = j.value("metadata", nlohmann::json::object());
    check_table(t);
    return t;
}

double model_total_mass(const Model& m, const EvalOptions& options) {
    return total_mass(density_for(m, options), typical_scale(m));
}

std::size_t count_modes(std::span<const double> values) {
    std::vector<double> v;
    for (const double x : values) {
        if (v.empty() || x != v.back()) v.push_back(x);
    }
    if (v.size() < 2) return v.size();
    std::size_t modes = v[1] < v[0] ? 1 : 0;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        if (v[i] > v[i - 1] && v[i] > v[i + 1]) ++modes;
    }
    if (v[v.size() - 1] > v[v.size() - 2]) ++modes;
    return modes;
}

FigureSpec figure_spec(int id) {
    FigureSpec f;
    f.id = id;
    f.grid = {0.01, 4.0, 200};
    const std::vector<double> alphas = {1.0, 1.5, 2.0, 3.0, 4.0};
    const std::vector<double> mus = {0.5, 1.0, 2.0, 4.0};
    switch (id) {
        case 1: {
            const GammaShadowParams g(1.1, 0.9);
            f.family = "akm-gamma";
            f.sweep_parameter = "alpha";
            f.sweep_values = alphas;
            f.fixed = {{"b", 1.1}, {"omega", 0.9}, {"mu", 2.1}, {"kappa", 1.0}};
            for (const double a : alphas) {
                f.members.push_back({"alpha=" + format_double(a), a, CompositeModel{AkmParams(a, 1.0, 2.1), g}});
            }
            break;
        }
        case 2: {
            const GammaShadowParams g(1.8, 0.7);
            f.family = "kmu-gamma";
            f.sweep_parameter = "mu";
            f.sweep_values = mus;
            f.fixed = {{"alpha", 2.0}, {"b", 1.8}, {"omega", 0.7}, {"kappa", 4.0}};
            for (const double mu : mus) {
                f.members.push_back({"mu=" + format_double(mu), mu, CompositeModel{AkmParams(2.0, 4.0, mu), g}});
            }
            break;
        }
        case 3: {
            const GammaShadowParams g(1.1, 0.9);
            f.family = "am-gamma";
            f.sweep_parameter = "alpha";
            f.sweep_values = alphas;
            f.fixed = {{"b", 1.1}, {"omega", 0.9}, {"mu", 2.1}};
            for (const double a : alphas) {
                f.members.push_back({"alpha=" + format_double(a), a, CompositeModel{AmParams(a, 2.1), g}});
            }
            break;
        }
        case 4: {
            const GammaShadowParams g(1.2, 0.8);
            f.family = "extreme-gamma";
            f.sweep_parameter = "alpha";
            f.sweep_values = alphas;
            f.fixed = {{"b", 1.2}, {"omega", 0.8}, {"m", 1.1}};
            for (const double a : alphas) {
                f.members.push_back({"alpha=" + format_double(a), a, CompositeModel{ExtremeParams(a, 1.1), g}});
            }
            break;
        }
        default:
            detail::throw_domain("figure", "id must be 1, 2, 3 or 4");
    }
    return f;
}

std::vector<CurveTable> figure_curves(int id, const EvalOptions& options) {
    const FigureSpec spec = figure_spec(id);
    const auto xs = make_grid(spec.grid);
    std::vector<CurveTable> out;
    for (const auto& member : spec.members) {
        CurveTable t = pdf_table(member.model, xs, options);
        const double mass = model_total_mass(member.model, options);
        const bool nonnegative =
            std::all_of(t.values.begin(), t.values.end(), [](double v) { return v >= 0.0 && std::isfinite(v); });
        t.metadata["figure"] = id;
        t.metadata["family"] = spec.family;
        t.metadata["label"] = member.label;
        t.metadata["sweep"] = {{"parameter", spec.sweep_parameter}, {"values", spec.sweep_values},
                               {"member", member.sweep_value}};
        t.metadata["fixed"] = spec.fixed;
        t.metadata["total_mass"] = mass;
        t.metadata["nonnegative"] = nonnegative;
        t.metadata["modes"] = count_modes(t.values);
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace compfade::curves
