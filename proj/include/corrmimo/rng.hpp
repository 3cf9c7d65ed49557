#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "corrmimo/types.hpp"

namespace corrmimo {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256++ stream with explicit sub-stream derivation. All draw paths
/// (uniform, Gaussian) are pinned here so results do not depend on the
/// standard library's distribution implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : state_) w = splitmix64(sm);
    }

    /// Independent stream for one Monte Carlo trial of a master-seeded run.
    static Rng for_trial(std::uint64_t master_seed, std::uint64_t trial_index) {
        std::uint64_t sm = master_seed ^ (0x632be59bd9b4e019ULL + trial_index);
        std::uint64_t mixed = splitmix64(sm);
        mixed ^= splitmix64(sm);
        return Rng(mixed);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (sine/cosine pair cached).
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - next_double();  // (0, 1], keeps log finite
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Circularly symmetric complex Gaussian CN(0, variance): independent
    /// real/imaginary parts of variance/2 each.
    Complex next_cgaussian(double variance = 1.0) {
        const double s = std::sqrt(variance / 2.0);
        const double re = next_gaussian();
        const double im = next_gaussian();
        return {s * re, s * im};
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4]{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// rows x cols matrix of i.i.d. CN(0, 1) entries, drawn column-major.
inline ComplexMatrix random_iid_cgaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    ComplexMatrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.next_cgaussian(1.0);
    return m;
}

/// Haar-ish random n x m matrix with orthonormal columns: QR of a Gaussian
/// matrix, R-diagonal phases folded into Q for a well-defined distribution.
inline ComplexMatrix random_semiunitary(Rng& rng, Eigen::Index n, Eigen::Index m) {
    ComplexMatrix g = random_iid_cgaussian(rng, n, m);
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, m);
    ComplexMatrix r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < m; ++j) {
        const Complex d = r(j, j);
        const double mag = std::abs(d);
        if (mag > 0.0) q.col(j) *= d / mag;
    }
    return q;
}

inline ComplexMatrix random_unitary(Rng& rng, Eigen::Index n) {
    return random_semiunitary(rng, n, n);
}

inline ComplexMatrix random_hermitian(Rng& rng, Eigen::Index n) {
    ComplexMatrix a = random_iid_cgaussian(rng, n, n);
    return 0.5 * (a + a.adjoint());
}

/// Random Hermitian positive semidefinite matrix G G^H / n.
inline ComplexMatrix random_psd(Rng& rng, Eigen::Index n) {
    ComplexMatrix g = random_iid_cgaussian(rng, n, n);
    return g * g.adjoint() / static_cast<double>(n);
}

}  // namespace corrmimo
