#ifndef WCUM_TYPES_HPP
#define WCUM_TYPES_HPP

#include <armadillo>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wcum {

// Tolerances shared by the domain-type invariants.
constexpr double kHermitianTol = 1e-9;   // max entrywise |Q - Q^H|
constexpr double kPsdEigTol = 1e-8;      // min eigenvalue >= -tol * (1 + trace)
constexpr double kPowerTol = 1e-6;       // total trace <= P + tol

enum class Utility { SumRate, WeightedSumRate, ProportionalFair };

/// Selects the system utility U(R_1,...,R_K); strictly increasing in every rate.
struct UtilityKind {
    Utility tag = Utility::SumRate;
    arma::vec weights;  // WeightedSumRate only, length K, all > 0

    static UtilityKind sum_rate() { return {Utility::SumRate, {}}; }
    static UtilityKind weighted_sum_rate(arma::vec w) { return {Utility::WeightedSumRate, std::move(w)}; }
    static UtilityKind proportional_fair() { return {Utility::ProportionalFair, {}}; }
};

/// Static description of the downlink: N_t antennas serving K single-antenna
/// users under a total power budget P (linear scale) and per-user noise powers.
struct SystemConfig {
    arma::uword n_tx = 1;
    arma::uword n_users = 1;
    double power_budget = 1.0;  // linear, not dB
    arma::vec noise_powers;     // sigma_k^2, linear, length K
    UtilityKind utility;

    void validate() const;
};

/// Channel estimates \hat h_k with spherical uncertainty radii r_k.
/// The true channel is \hat h_k + e_k with ||e_k|| <= r_k.
struct ChannelSet {
    std::vector<arma::cx_vec> estimates;
    arma::vec radii;

    void validate(const SystemConfig& config) const;
};

/// Per-user transmit covariance matrices Q_k (Hermitian PSD, sum of traces <= P).
struct CovarianceSet {
    std::vector<arma::cx_mat> matrices;

    double total_trace() const;
    void validate(const SystemConfig& config) const;
    static CovarianceSet zeros(const SystemConfig& config);
};

}  // namespace wcum

#endif
