// adiabatic.hpp — Low-frequency parallel-channel limit: the instantaneous
// eigenmodes c_i(t) = sum_j T_ij(t) d_j of the 3x3 TQD matrix act as three
// independent dots, each exchanging electrons with both residual reservoirs at
// golden-rule rates Gamma_{i,nu}(t) = J_nu(eps_i(t)) |T_{i,nu}(t)|^2.
//
// Channels are labelled upper, center, lower by descending energy at t = 0 and
// tracked by eigenvector overlap afterwards.

#pragma once

#include <array>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rcpump/fcs.hpp"
#include "rcpump/fme.hpp"
#include "rcpump/hamiltonian.hpp"

namespace rcpump {

enum class Channel { Upper = 0, Center = 1, Lower = 2 };

inline const char* channel_name(Channel c) {
    switch (c) {
    case Channel::Upper: return "u";
    case Channel::Center: return "c";
    default: return "d";
    }
}

struct AdiabaticityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ChannelSample {
    std::array<double, 3> energy{};
    Mat3 T;                                      // row i = channel i
    std::array<std::array<double, 2>, 3> rate{};  // rate[i][nu], nu = 0 (L), 1 (R)
};

struct ChannelDecomposition {
    TQDParams params;
    double omega{1.0};
    int n_t{0};
    std::vector<double> t;  // t_j = j T / n_t, j < n_t
    std::vector<ChannelSample> samples;
    double min_overlap{1.0};  // smallest |<v_i(t_j)|v_i(t_{j+1})>| along the tracked labels
    double min_gap{0.0};
    std::vector<std::pair<double, double>> ambiguous;  // intervals with gap below the threshold

    double period() const { return kTwoPi / omega; }
    // Re-diagonalizes at t, labelling by overlap with the nearest grid sample.
    ChannelSample at(double t) const;
};

inline constexpr int kDefaultChannelGrid = 4096;
inline constexpr double kDegeneracyThreshold = 1e-6;

ChannelDecomposition decompose_channels(const TQDParams& p, int n_t = kDefaultChannelGrid);

// max over t and pairs i != j of |(dT/dt T^dagger)_ij| / |eps_i - eps_j|.
double adiabaticity_metric(const ChannelDecomposition& dec);

inline constexpr double kDefaultAdiabaticThreshold = 0.1;

// Two-state (empty, occupied) counting generator of one channel, counting at the left reservoir.
CountingGenerator channel_generator(const ChannelDecomposition& dec, Channel ch, const Reservoirs& res);

struct AdiabaticOptions {
    double threshold{kDefaultAdiabaticThreshold};
    bool allow_nonadiabatic{false};
    int n_grid{kDefaultChannelGrid};
    StepControl control{};
};

CumulantRecord channel_cumulants(const ChannelDecomposition& dec, Channel ch, const Reservoirs& res,
                                 const AdiabaticOptions& opt = {});

// Independent route: scalar equations for n(t) and the auxiliary x(t) = X_1 = -X_0,
// integrated by an embedded Runge-Kutta scheme until periodic.
struct ClosedFormCumulants {
    std::vector<double> t, occupation, current, noise;
    double Q{0.0};
    double dQ2{0.0};
    int periods{0};
};
ClosedFormCumulants channel_cumulants_closed_form(const ChannelDecomposition& dec, Channel ch,
                                                  const Reservoirs& res, int n_grid = kDefaultChannelGrid,
                                                  double tol = 1e-12);

struct TotalCumulants {
    double Q{0.0};
    double dQ2{0.0};
    std::array<double, 3> Q_channel{};
    std::array<double, 3> dQ2_channel{};
    double metric{0.0};
};

// Throws AdiabaticityError above the threshold unless allow_nonadiabatic is set.
TotalCumulants total_cumulants(const ChannelDecomposition& dec, const Reservoirs& res,
                               const AdiabaticOptions& opt = {});

} // namespace rcpump
