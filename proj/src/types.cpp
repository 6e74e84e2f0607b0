#include "wcum/types.hpp"

namespace wcum {

void SystemConfig::validate() const {
    if (n_tx < 1)
        throw std::invalid_argument("SystemConfig: n_tx must be >= 1");
    if (n_users < 1)
        throw std::invalid_argument("SystemConfig: n_users must be >= 1");
    if (!(power_budget > 0.0) || !std::isfinite(power_budget))
        throw std::invalid_argument("SystemConfig: power_budget must be > 0");
    if (noise_powers.n_elem != n_users)
        throw std::invalid_argument("SystemConfig: noise_powers must have length n_users");
    for (double s : noise_powers)
        if (!(s > 0.0) || !std::isfinite(s))
            throw std::invalid_argument("SystemConfig: every noise power must be > 0");
    switch (utility.tag) {
        case Utility::WeightedSumRate:
            if (utility.weights.n_elem != n_users)
                throw std::invalid_argument("UtilityKind: weights must have length n_users");
            for (double w : utility.weights)
                if (!(w > 0.0) || !std::isfinite(w))
                    throw std::invalid_argument("UtilityKind: weights must be > 0");
            break;
        case Utility::SumRate:
        case Utility::ProportionalFair:
            break;
    }
}

void ChannelSet::validate(const SystemConfig& config) const {
    if (estimates.size() != config.n_users)
        throw std::invalid_argument("ChannelSet: need one estimate per user");
    if (radii.n_elem != config.n_users)
        throw std::invalid_argument("ChannelSet: need one radius per user");
    for (const auto& h : estimates) {
        if (h.n_elem != config.n_tx)
            throw std::invalid_argument("ChannelSet: estimate dimension != n_tx");
        if (!h.is_finite())
            throw std::invalid_argument("ChannelSet: estimate entries must be finite");
    }
    for (double r : radii)
        if (!(r >= 0.0) || !std::isfinite(r))
            throw std::invalid_argument("ChannelSet: radii must be finite and >= 0");
}

double CovarianceSet::total_trace() const {
    double s = 0.0;
    for (const auto& q : matrices) s += arma::trace(q).real();
    return s;
}

void CovarianceSet::validate(const SystemConfig& config) const {
    if (matrices.size() != config.n_users)
        throw std::invalid_argument("CovarianceSet: need one matrix per user");
    for (const auto& q : matrices) {
        if (q.n_rows != config.n_tx || q.n_cols != config.n_tx)
            throw std::invalid_argument("CovarianceSet: matrix dimension != n_tx");
        if (arma::abs(q - q.t()).max() > kHermitianTol)
            throw std::invalid_argument("CovarianceSet: matrix not Hermitian within tolerance");
        const double tr = arma::trace(q).real();
        arma::vec eigs = arma::eig_sym(arma::cx_mat(0.5 * (q + q.t())));
        if (eigs.min() < -kPsdEigTol * (1.0 + tr))
            throw std::invalid_argument("CovarianceSet: matrix not PSD within tolerance");
    }
    if (total_trace() > config.power_budget + kPowerTol)
        throw std::invalid_argument("CovarianceSet: total trace exceeds power budget");
}

CovarianceSet CovarianceSet::zeros(const SystemConfig& config) {
    CovarianceSet covs;
    covs.matrices.assign(config.n_users, arma::cx_mat(config.n_tx, config.n_tx, arma::fill::zeros));
    return covs;
}

}  // namespace wcum
