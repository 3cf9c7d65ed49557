#pragma once

#include <functional>
#include <numbers>
#include <vector>

#include "corrmimo/rng.hpp"
#include "corrmimo/types.hpp"

namespace corrmimo {

/// Real vector kept in non-increasing order.
class OrderedVector {
  public:
    static OrderedVector from(RealVector v) {
        require(all_finite(v), "OrderedVector: non-finite entries");
        return OrderedVector(sorted_descending(std::move(v)));
    }
    static OrderedVector from_sorted(RealVector v) {
        require(all_finite(v), "OrderedVector: non-finite entries");
        require(is_non_increasing(v), "OrderedVector: values not non-increasing");
        return OrderedVector(std::move(v));
    }

    const RealVector& values() const { return v_; }
    Eigen::Index size() const { return v_.size(); }
    double operator()(Eigen::Index i) const { return v_(i); }

  private:
    explicit OrderedVector(RealVector v) : v_(std::move(v)) {}
    RealVector v_;
};

namespace detail {

// Prefix-sum comparison on vectors normalized by the reference total, so the
// 1e-12 tolerance is scale-free. For non-negative power vectors the scale is
// exactly sum(b); the max-entry floor keeps the tolerance meaningful for
// near-zero-trace spectra. `require_total_equality` distinguishes full
// majorization from the weak prefix-only order.
inline bool prefix_dominated(const RealVector& a, const RealVector& b, bool require_total_equality,
                             double tol = 1e-12) {
    double scale = std::max(std::abs(b.sum()), b.cwiseAbs().maxCoeff());
    if (scale < 1e-30) scale = 1.0;
    double pa = 0.0, pb = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        pa += a(i) / scale;
        pb += b(i) / scale;
        if (pa > pb + tol) return false;
    }
    if (require_total_equality && std::abs(pa - pb) > tol) return false;
    return true;
}

}  // namespace detail

/// a majorized by b: prefix sums of a never exceed those of b, totals equal.
inline bool majorizes(const OrderedVector& a, const OrderedVector& b) {
    require(a.size() == b.size(), "majorizes: length mismatch");
    return detail::prefix_dominated(a.values(), b.values(), /*require_total_equality=*/true);
}

inline bool weakly_submajorizes(const OrderedVector& a, const OrderedVector& b) {
    require(a.size() == b.size(), "weakly_submajorizes: length mismatch");
    return detail::prefix_dominated(a.values(), b.values(), /*require_total_equality=*/false);
}

/// Supermajorization with the prefix inequality reversed (the dual order:
/// a weakly supermajorized by b iff b weakly submajorized by a).
inline bool weakly_supermajorizes(const OrderedVector& a, const OrderedVector& b) {
    require(a.size() == b.size(), "weakly_supermajorizes: length mismatch");
    return detail::prefix_dominated(b.values(), a.values(), /*require_total_equality=*/false);
}

struct UnitaryStochasticPair {
    ComplexMatrix gamma;  // unitary
    RealMatrix q;         // q(i,j) = |gamma(i,j)|^2, doubly stochastic
};

/// Unitary matrix with all squared magnitudes equal to 1/m: real Hadamard
/// rotation for m = 2, DFT otherwise.
inline ComplexMatrix constant_modulus_unitary(Eigen::Index m) {
    require(m >= 1, "constant_modulus_unitary: m must be positive");
    if (m == 1) return ComplexMatrix::Constant(1, 1, Complex{1.0, 0.0});
    if (m == 2) {
        ComplexMatrix g(2, 2);
        const double s = 1.0 / std::numbers::sqrt2;
        g << s, s, s, -s;
        return g;
    }
    ComplexMatrix g(m, m);
    const double norm = 1.0 / std::sqrt(static_cast<double>(m));
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < m; ++i) {
            const double angle =
                -2.0 * std::numbers::pi * static_cast<double>(i * j) / static_cast<double>(m);
            g(i, j) = norm * Complex{std::cos(angle), std::sin(angle)};
        }
    return g;
}

/// Constructive converse of the Schur-Horn theorem: given u majorized by v,
/// builds a unitary Gamma whose squared-magnitude matrix Q satisfies u = v Q,
/// i.e. diag(Gamma^H diag(v) Gamma) = u. Shortcuts: identity when u == v,
/// constant-modulus unitary when u is constant; otherwise a chain of plane
/// rotations, each pinning one diagonal entry to its target against the pair
/// of active values bracketing it.
inline UnitaryStochasticPair unitary_stochastic_from_majorization(const OrderedVector& u,
                                                                  const OrderedVector& v) {
    require(u.size() == v.size(), "unitary_stochastic_from_majorization: length mismatch");
    require(majorizes(u, v), "unitary_stochastic_from_majorization: u not majorized by v");

    const Eigen::Index m = u.size();
    double scale = v.values().cwiseAbs().maxCoeff();
    if (scale < 1e-30) scale = 1.0;
    const double tol = 1e-12 * scale;

    UnitaryStochasticPair out;
    if ((u.values() - v.values()).cwiseAbs().maxCoeff() <= tol) {
        out.gamma = ComplexMatrix::Identity(m, m);
    } else if (u.values().maxCoeff() - u.values().minCoeff() <= tol) {
        out.gamma = constant_modulus_unitary(m);
    } else {
        ComplexMatrix gamma = ComplexMatrix::Identity(m, m);
        std::vector<Eigen::Index> active(static_cast<std::size_t>(m));
        RealVector w = v.values();
        for (Eigen::Index i = 0; i < m; ++i) active[static_cast<std::size_t>(i)] = i;
        std::vector<Eigen::Index> frozen;
        frozen.reserve(static_cast<std::size_t>(m));

        for (Eigen::Index t = 0; t + 1 < m; ++t) {
            const double target = u(t);
            // Smallest active value >= target and largest active value < target.
            std::size_t hi = active.size(), lo = active.size();
            for (std::size_t s = 0; s < active.size(); ++s) {
                const double val = w(active[s]);
                if (val >= target - tol) {
                    if (hi == active.size() || val < w(active[hi])) hi = s;
                } else {
                    if (lo == active.size() || val > w(active[lo])) lo = s;
                }
            }
            require(hi != active.size(),
                    "unitary_stochastic_from_majorization: bracketing failed (no value >= target)");

            const Eigen::Index p = active[hi];
            if (lo == active.size() || std::abs(w(p) - target) <= tol) {
                // Exact hit, no rotation needed.
                frozen.push_back(p);
                active.erase(active.begin() + static_cast<std::ptrdiff_t>(hi));
                continue;
            }
            const Eigen::Index q = active[lo];
            const double whi = w(p), wlo = w(q);
            const double c2 = (target - wlo) / (whi - wlo);
            const double c = std::sqrt(std::clamp(c2, 0.0, 1.0));
            const double s = std::sqrt(std::clamp(1.0 - c2, 0.0, 1.0));

            // Plane rotation in coordinates (p, q): new diagonal value at p is
            // c^2 * whi + s^2 * wlo = target, leftover stays active at q.
            ComplexMatrix g = ComplexMatrix::Identity(m, m);
            g(p, p) = c;
            g(q, p) = s;
            g(p, q) = -s;
            g(q, q) = c;
            gamma = gamma * g;

            w(p) = target;
            w(q) = whi + wlo - target;
            frozen.push_back(p);
            active.erase(active.begin() + static_cast<std::ptrdiff_t>(hi));
        }
        frozen.push_back(active.front());

        // Columns are reordered so diagonal entry k lands on target u(k).
        ComplexMatrix permuted(m, m);
        for (Eigen::Index k = 0; k < m; ++k)
            permuted.col(k) = gamma.col(frozen[static_cast<std::size_t>(k)]);
        out.gamma = permuted;
    }
    out.q = out.gamma.cwiseAbs2();
    return out;
}

struct SchurProbeResult {
    bool consistent_concave = true;
    bool consistent_convex = true;
    int trials = 0;
};

/// Randomized falsifier for Schur-concavity/-convexity: samples pairs a < b
/// (b random positive, a obtained by random T-transform mixing) and records
/// which inequality direction survived every pair. Not a proof.
inline SchurProbeResult schur_probe(const std::function<double(const RealVector&)>& f,
                                    Eigen::Index dim, int trials, Rng& rng) {
    require(dim >= 2, "schur_probe: dim must be >= 2");
    require(trials >= 1, "schur_probe: trials must be >= 1");

    SchurProbeResult res;
    res.trials = trials;
    for (int t = 0; t < trials; ++t) {
        RealVector b(dim);
        for (Eigen::Index i = 0; i < dim; ++i) b(i) = 0.05 + std::abs(rng.next_gaussian());
        b = sorted_descending(b);

        RealVector a = b;
        const int mixes = 1 + static_cast<int>(rng.next_u64() % 3);
        for (int k = 0; k < mixes; ++k) {
            const Eigen::Index i = static_cast<Eigen::Index>(rng.next_u64() % dim);
            Eigen::Index j = static_cast<Eigen::Index>(rng.next_u64() % dim);
            if (j == i) j = (j + 1) % dim;
            const double lam = rng.next_double();
            const double ai = a(i), aj = a(j);
            a(i) = lam * ai + (1.0 - lam) * aj;
            a(j) = lam * aj + (1.0 - lam) * ai;
        }
        a = sorted_descending(a);

        const double fa = f(a), fb = f(b);
        const double tol = 1e-12 * std::max({1.0, std::abs(fa), std::abs(fb)});
        if (fa < fb - tol) res.consistent_concave = false;  // needs f(a) >= f(b) under a < b
        if (fa > fb + tol) res.consistent_convex = false;
        if (!res.consistent_concave && !res.consistent_convex) break;
    }
    return res;
}

/// sum(x) <= (1/K) * sum(x_i / y_i) * sum(y) for positive K-tuples.
inline bool k_tuple_inequality_check(const RealVector& x, const RealVector& y) {
    require(x.size() == y.size(), "k_tuple_inequality_check: length mismatch");
    require(x.size() >= 1, "k_tuple_inequality_check: empty input");
    for (Eigen::Index i = 0; i < x.size(); ++i)
        require(x(i) > 0.0 && y(i) > 0.0, "k_tuple_inequality_check: entries must be positive");

    const double k = static_cast<double>(x.size());
    const double lhs = x.sum();
    const double rhs = (x.array() / y.array()).sum() * y.sum() / k;
    return lhs <= rhs + 1e-12 * std::max(1.0, std::abs(rhs));
}

}  // namespace corrmimo
