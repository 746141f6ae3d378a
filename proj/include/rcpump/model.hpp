// model.hpp — Spectral densities, reservoirs, driving protocols and the fermionic
// reaction-coordinate map.
//
// Units: energies in units of the static dot energy eps0, hbar = 1, e = 1.

#pragma once

#include <string>
#include <variant>
#include <vector>

namespace rcpump {

enum class Lead { Left = 0, Right = 1 };

inline const char* lead_name(Lead l) { return l == Lead::Left ? "L" : "R"; }

// J(w) = Gamma * width^2 / ((w - center)^2 + width^2)
struct Lorentzian {
    double coupling{0.0};  // Gamma, peak value
    double width{0.0};     // delta
    double center{0.0};
};

// Frequency independent J(w) = value (wide band).
struct FlatBand {
    double value{0.0};
};

// Samples of J on a strictly increasing grid; zero outside the grid.
struct Tabulated {
    std::vector<double> omega;
    std::vector<double> value;
};

class SpectralDensity {
public:
    using Shape = std::variant<Lorentzian, FlatBand, Tabulated>;

    static SpectralDensity lorentzian(double coupling, double width, double center);
    static SpectralDensity flat(double value);
    static SpectralDensity tabulated(std::vector<double> omega, std::vector<double> value);

    // Throws std::out_of_range for a tabulated density evaluated off its grid.
    double operator()(double omega) const;
    // Same, but a tabulated density is treated as compactly supported.
    double value_or_zero(double omega) const;

    const Shape& shape() const { return shape_; }
    bool is_lorentzian() const { return std::holds_alternative<Lorentzian>(shape_); }
    bool is_flat() const { return std::holds_alternative<FlatBand>(shape_); }
    bool is_tabulated() const { return std::holds_alternative<Tabulated>(shape_); }
    const Lorentzian& as_lorentzian() const { return std::get<Lorentzian>(shape_); }
    const Tabulated& as_tabulated() const { return std::get<Tabulated>(shape_); }

    // Same density with every value multiplied by c >= 0.
    SpectralDensity scaled(double c) const;

private:
    explicit SpectralDensity(Shape s) : shape_(std::move(s)) {}
    Shape shape_;
};

double sd_eval(const SpectralDensity& sd, double omega);

// Two numeric columns (omega, J), '#' comment lines and blank lines ignored.
SpectralDensity load_tabulated(const std::string& path);

struct ReservoirSpec {
    double beta{1.0};
    double mu{0.0};
    SpectralDensity spectral_density = SpectralDensity::flat(0.0);
    Lead label{Lead::Left};
};

double fermi(double omega, double beta, double mu);
inline double fermi(double omega, const ReservoirSpec& res) { return fermi(omega, res.beta, res.mu); }

// eps(t)      = dot_energy + dot_amplitude * cos(frequency t + phase_sign * phase)
// lambda_L(t) = lambda_L (1 - amp_left  cos(frequency t))
// lambda_R(t) = lambda_R (1 + amp_right cos(frequency t))
// The tunnelling amplitudes factorize as t_k(t) = g_nu(t) t_k, so only the RC
// coupling inherits the drive and the RC energy stays constant.
struct DrivingProtocol {
    double frequency{1.0};
    double phase{0.0};
    double dot_amplitude{0.0};
    double amp_left{1.0};
    double amp_right{1.0};
    double dot_energy{1.0};
    // -1: the dot energy lags the barriers by phase (default); +1: it leads them.
    double phase_sign{-1.0};

    double period() const;
    double dot_energy_at(double t) const;
    // Multiplier g_nu(t) of every tunnelling amplitude of lead nu.
    double coupling_modulation(Lead lead, double t) const;
    void validate() const;
};

struct RCParameters {
    double coupling{0.0};  // lambda_nu
    double energy{0.0};    // eps_nu
    SpectralDensity residual = SpectralDensity::flat(0.0);
};

// lambda = sqrt(Gamma delta / 2), residual density flat at 2 delta.
RCParameters rc_map_lorentzian(const SpectralDensity& sd);

// Moment integrals for lambda and eps; the residual density is returned on the
// input grid. Throws std::invalid_argument if the zeroth moment is not positive.
RCParameters rc_map_generic(const SpectralDensity& sd);

// Gamma that maps onto a given lambda for width delta.
inline double gamma_for_coupling(double lambda, double width) { return 2.0 * lambda * lambda / width; }

} // namespace rcpump
