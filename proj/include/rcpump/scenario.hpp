// scenario.hpp — Parameter sweeps over the three pipelines (Floquet master
// equation, adiabatic channels, exact oracle) and their CSV output.
//
// Config files are INI-style: [scenario], [physics], [sweep], [numerics],
// [output], [rc] sections of `key = value` lines, '#' or ';' comment lines. Angles may
// be written as multiples of pi ("1.52pi").

#pragma once

#include <array>
#include <cmath>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rcpump/adiabatic.hpp"
#include "rcpump/fme.hpp"
#include "rcpump/oracle.hpp"

namespace rcpump {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Regime { Floquet, Adiabatic, Oracle };

const char* regime_name(Regime r);

struct Physics {
    double omega{1.9};
    double phase{0.0};
    double phase_sign{-1.0};
    double dot_amplitude{2.5};
    double amp_left{1.0};
    double amp_right{1.0};
    double dot_energy{1.0};
    double lambda{0.25};
    std::optional<double> gamma;  // overrides lambda through lambda = sqrt(gamma width / 2)
    double width{0.05};
    double bias{0.0};
    double beta{3.3};
    double mu{1.0};

    double coupling() const;
    TQDParams tqd() const;
    Reservoirs reservoirs() const;
};

// Sweepable parameter names: omega, phase, dot_amplitude, lambda, gamma, width, bias, beta, mu.
void set_parameter(Physics& p, const std::string& name, double value);

struct Axis {
    std::string name;
    double start{0.0};
    double stop{0.0};
    int count{1};

    double value(int i) const;
};

struct Numerics {
    FMEOptions fme{};
    int channel_grid{kDefaultChannelGrid};
    double adiabatic_threshold{kDefaultAdiabaticThreshold};
    bool allow_nonadiabatic{false};
    bool closed_form{true};
    int cumulant_grid{kDefaultChannelGrid};
    double channel_tol{1e-12};
    OracleOptions oracle{};
    bool oracle_original{false};
};

struct Scenario {
    std::string name;
    std::string source;
    Regime regime{Regime::Floquet};
    Physics physics;
    std::vector<Axis> axes;  // at most two
    Numerics numerics;
    std::string output;
    std::vector<double> gamma_list;  // [rc] table for rc-info
    std::vector<std::pair<std::string, std::string>> resolved;  // every key with its effective value

    int points() const;
    // Row-major: the last axis varies fastest.
    Physics point(int index, std::array<double, 2>& axis_values) const;
};

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(std::istream& in, const std::string& origin = "<config>");

struct Row {
    double axis1{std::nan("")};
    double axis2{std::nan("")};
    double Q{std::nan("")};
    double dQ2{std::nan("")};
    std::array<double, 3> Q_channel{std::nan(""), std::nan(""), std::nan("")};
    std::array<double, 3> dQ2_channel{std::nan(""), std::nan(""), std::nan("")};
    double tail_norm{std::nan("")};
    double min_pop{std::nan("")};
    double adiab_metric{std::nan("")};
    std::string status{"ok"};
    double wall_ms{0.0};
};

Row run_point(const Scenario& s, int index);

struct SweepResult {
    std::vector<Row> rows;
    int failures() const;
};

// Worker pool over grid points; rows are stored by grid index, so the result
// does not depend on the thread count or completion order.
SweepResult run_scenario(const Scenario& s, int threads = 1, bool verbose = false);

inline constexpr const char* kCsvColumns =
    "axis1,axis2,Q,dQ2,Q_u,Q_c,Q_d,dQ2_u,dQ2_c,dQ2_d,tail_norm,min_pop,adiab_metric,status,wall_ms";

// '#' header (version, timestamp, resolved config) followed by the column line and rows.
void write_csv(std::ostream& out, const Scenario& s, const SweepResult& r, bool timing = true);
// Temporary file in the same directory, then rename.
void write_csv_atomic(const std::string& path, const Scenario& s, const SweepResult& r, bool timing = true);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    int column(const std::string& name) const;  // -1 when absent
};
CsvTable read_csv(std::istream& in, const std::string& origin = "<csv>");
CsvTable read_csv(const std::string& path);

struct PointDifference {
    double axis1{0.0};
    double axis2{0.0};
    double a{0.0};
    double b{0.0};
    double absolute{0.0};
    double relative{0.0};  // |a - b| / max(|a|, |b|), 0 when both vanish
};

struct Comparison {
    std::string column;
    std::vector<PointDifference> points;
    double max_absolute{0.0};
    double max_relative{0.0};
    double mean_relative{0.0};
    int missing{0};  // points where exactly one side is nan
};

// Point-by-point comparison of one column; throws ConfigError unless both
// tables have the same axis values in the same order.
Comparison compare_tables(const CsvTable& a, const CsvTable& b, const std::string& column = "Q");

} // namespace rcpump
