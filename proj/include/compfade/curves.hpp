#pragma once

#include "compfade/model.hpp"

#include "json.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace compfade::curves {

inline constexpr const char* kToolVersion = "0.1.0";

struct GridSpec {
    double min = 0.0;
    double max = 1.0;
    std::size_t points = 2;
};

/// Parses "min:max:points". DomainError unless 0 ≤ min < max and points ≥ 2.
GridSpec parse_grid(const std::string& text);
void check_grid(const GridSpec& g);
std::vector<double> make_grid(const GridSpec& g);

/// One evaluated curve: the unit written by the CLI.
struct CurveTable {
    nlohmann::json model_descriptor;
    std::vector<double> x;
    std::vector<double> values;
    std::vector<Atom> atoms;
    nlohmann::json metadata;
};

/// DomainError unless x is strictly increasing and the lengths match.
void check_table(const CurveTable& t);

struct EvalOptions {
    composite::SeriesConfig series;
    bool oracle = false;  ///< composites: use the mixture integral instead of the series
    unsigned threads = 1;
};

CurveTable pdf_table(const Model& m, std::span<const double> xs, const EvalOptions& options = {});

/// Pr[X ≤ x], atoms included. Closed forms for the plain laws, cumulative
/// quadrature of the density for composites.
CurveTable cdf_table(const Model& m, std::span<const double> xs, const EvalOptions& options = {});

/// `x,value` header, one row per point, then `#atom,location,mass` rows.
void write_csv(const CurveTable& t, std::ostream& out);

/// Reads what write_csv wrote; descriptor and metadata are left empty.
CurveTable read_csv(std::istream& in);

nlohmann::json to_json(const CurveTable& t);
CurveTable from_json(const nlohmann::json& j);

/// Continuous quadrature plus atoms of the density the table was drawn from.
double model_total_mass(const Model& m, const EvalOptions& options = {});

/// Number of strict local maxima after merging flat runs, counting an end
/// point when the curve peaks there.
std::size_t count_modes(std::span<const double> values);

struct FigureMember {
    std::string label;
    double sweep_value;
    Model model;
};

struct FigureSpec {
    int id = 0;
    std::string family;
    std::string sweep_parameter;
    std::vector<double> sweep_values;
    nlohmann::json fixed;
    GridSpec grid;
    std::vector<FigureMember> members;
};

/// Parameter families of figures 1-4; DomainError for any other id.
FigureSpec figure_spec(int id);

/// Evaluates every member of a figure. Each table's metadata records the
/// sweep, the total mass, non-negativity and the number of modes.
std::vector<CurveTable> figure_curves(int id, const EvalOptions& options = {});

}  // namespace compfade::curves
