#include "wcum/model.hpp"

#include <cmath>

namespace wcum {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t Rng::next_u64() {
    // canonical splitmix64: additive Weyl sequence pushed through the mixer
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double m = std::sqrt(-2.0 * std::log(u1));
    spare_ = m * std::sin(2.0 * arma::datum::pi * u2);
    have_spare_ = true;
    return m * std::cos(2.0 * arma::datum::pi * u2);
}

arma::cx_vec Rng::cgaussian(arma::uword dim) {
    arma::cx_vec v(dim);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (arma::uword i = 0; i < dim; ++i)
        v[i] = std::complex<double>(gaussian() * inv_sqrt2, gaussian() * inv_sqrt2);
    return v;
}

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 0x51ed270b1ULL));
}

double rate(const CovarianceSet& covs, const arma::cx_vec& channel,
            arma::uword user_index, const SystemConfig& config) {
    if (channel.n_elem != config.n_tx)
        throw std::invalid_argument("rate: channel dimension != n_tx");
    if (user_index >= config.n_users)
        throw std::invalid_argument("rate: user_index out of range");
    if (covs.matrices.size() != config.n_users)
        throw std::invalid_argument("rate: covariance count != n_users");

    double signal = 0.0, interference = 0.0;
    for (arma::uword l = 0; l < config.n_users; ++l) {
        const double p = std::real(arma::cdot(channel, covs.matrices[l] * channel));
        if (l == user_index)
            signal = p;
        else
            interference += p;
    }
    signal = std::max(signal, 0.0);
    interference = std::max(interference, 0.0);
    const double sinr = signal / (interference + config.noise_powers[user_index]);
    return std::log2(1.0 + sinr);
}

double utility(const arma::vec& rates, const UtilityKind& kind) {
    if (rates.n_elem == 0)
        throw std::invalid_argument("utility: empty rate vector");
    if (!rates.is_finite())
        throw std::invalid_argument("utility: rates must be finite");
    switch (kind.tag) {
        case Utility::SumRate:
            return arma::sum(rates) / static_cast<double>(rates.n_elem);
        case Utility::WeightedSumRate:
            if (kind.weights.n_elem != rates.n_elem)
                throw std::invalid_argument("utility: weight/rate length mismatch");
            return arma::dot(kind.weights, rates);
        case Utility::ProportionalFair: {
            double u = 0.0;
            for (double r : rates) {
                if (!(r > 0.0))
                    throw std::domain_error("utility: ProportionalFair requires all rates > 0");
                u += std::log(r);
            }
            return u;
        }
    }
    throw std::invalid_argument("utility: unknown kind");
}

std::vector<arma::cx_vec> sample_channels(const SystemConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(Rng::derive(seed, 0xC4A77E15ULL));
    std::vector<arma::cx_vec> estimates;
    estimates.reserve(config.n_users);
    for (arma::uword k = 0; k < config.n_users; ++k)
        estimates.push_back(rng.cgaussian(config.n_tx));
    return estimates;
}

arma::cx_vec sample_error(double radius, arma::uword dim, Rng& rng, ErrorMode mode) {
    if (radius < 0.0 || !std::isfinite(radius))
        throw std::invalid_argument("sample_error: radius must be finite and >= 0");
    if (dim < 1)
        throw std::invalid_argument("sample_error: dim must be >= 1");
    if (radius == 0.0)
        return arma::cx_vec(dim, arma::fill::zeros);

    // Direction uniform on the complex sphere; scale by r (boundary) or by
    // r * U^(1/(2 dim)) (uniform over the solid ball in 2*dim real dims).
    arma::cx_vec dir = rng.cgaussian(dim);
    double nrm = arma::norm(dir);
    while (nrm == 0.0) {
        dir = rng.cgaussian(dim);
        nrm = arma::norm(dir);
    }
    dir /= nrm;
    double scale = radius;
    if (mode == ErrorMode::UniformBall)
        scale *= std::pow(rng.uniform(), 1.0 / (2.0 * static_cast<double>(dim)));
    return scale * dir;
}

arma::cx_vec sample_error(double radius, arma::uword dim, std::uint64_t seed, ErrorMode mode) {
    Rng rng(seed);
    return sample_error(radius, dim, rng, mode);
}

}  // namespace wcum
