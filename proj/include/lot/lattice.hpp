#pragma once

#include <memory>
#include <set>
#include <utility>

#include "lot/common.hpp"

namespace lot {

// A finite point set standing in for a compact metric space. Coordinates are
// optional and only feed metric-derived costs; labels are optional and only
// feed reports.
struct FiniteSpace {
    std::size_t n_points = 0;
    std::vector<std::string> labels;             // empty or n_points, unique
    std::vector<std::vector<double>> coords;     // empty or n_points

    FiniteSpace() = default;
    explicit FiniteSpace(std::size_t n) : n_points(n) { validate(); }
    FiniteSpace(std::size_t n, std::vector<std::string> lab, std::vector<std::vector<double>> xy = {})
        : n_points(n), labels(std::move(lab)), coords(std::move(xy)) {
        validate();
    }

    void validate() const {
        if (n_points < 1) throw ValidationError("FiniteSpace: n_points must be >= 1");
        if (!labels.empty()) {
            if (labels.size() != n_points) throw ValidationError("FiniteSpace: labels length mismatch");
            std::set<std::string> uniq(labels.begin(), labels.end());
            if (uniq.size() != labels.size()) throw ValidationError("FiniteSpace: labels must be unique");
        }
        if (!coords.empty() && coords.size() != n_points)
            throw ValidationError("FiniteSpace: coords length mismatch");
    }
};

using SpacePtr = std::shared_ptr<const FiniteSpace>;

inline SpacePtr make_space(std::size_t n) { return std::make_shared<FiniteSpace>(n); }

inline SpacePtr make_space(std::size_t n, std::vector<std::vector<double>> coords) {
    return std::make_shared<FiniteSpace>(n, std::vector<std::string>{}, std::move(coords));
}

// Real values indexed by a FiniteSpace. Plays both the continuous-function and
// the measure role; the order is componentwise in either case.
class LatticeVector {
public:
    LatticeVector() = default;
    LatticeVector(SpacePtr space, Vec values) : space_(std::move(space)), v_(std::move(values)) {
        if (!space_) throw ValidationError("LatticeVector: null space");
        if (v_.size() != space_->n_points) throw DimensionError("LatticeVector: length != n_points");
        for (double x : v_)
            if (!std::isfinite(x)) throw ValidationError("LatticeVector: values must be finite");
    }
    explicit LatticeVector(Vec values) {
        const std::size_t n = values.size();
        *this = LatticeVector(make_space(n), std::move(values));
    }

    const SpacePtr& space() const { return space_; }
    std::size_t size() const { return v_.size(); }
    const Vec& values() const { return v_; }
    double operator[](std::size_t i) const { return v_[i]; }
    double& operator[](std::size_t i) { return v_[i]; }

    LatticeVector with_values(Vec v) const { return LatticeVector(space_, std::move(v)); }

private:
    SpacePtr space_;
    Vec v_;
};

inline void check_same_space(const LatticeVector& a, const LatticeVector& b, const char* op) {
    if (a.size() != b.size()) throw DimensionError(std::string(op) + ": vectors live on different spaces");
}

inline LatticeVector operator+(const LatticeVector& a, const LatticeVector& b) {
    check_same_space(a, b, "operator+");
    Vec r(a.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = a[i] + b[i];
    return a.with_values(std::move(r));
}

inline LatticeVector operator-(const LatticeVector& a, const LatticeVector& b) {
    check_same_space(a, b, "operator-");
    Vec r(a.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = a[i] - b[i];
    return a.with_values(std::move(r));
}

inline LatticeVector operator*(double s, const LatticeVector& a) {
    Vec r(a.values());
    for (double& x : r) x *= s;
    return a.with_values(std::move(r));
}

// A measure with nonnegative atoms. Nonnegativity is exact at construction;
// tolerances apply only in downstream comparisons.
class PositiveMeasure {
public:
    PositiveMeasure() = default;
    explicit PositiveMeasure(LatticeVector base) : base_(std::move(base)) {
        for (std::size_t i = 0; i < base_.size(); ++i)
            if (base_[i] < 0)
                throw ValidationError("PositiveMeasure: negative atom at index " + std::to_string(i));
    }
    PositiveMeasure(SpacePtr space, Vec values) : PositiveMeasure(LatticeVector(std::move(space), std::move(values))) {}
    explicit PositiveMeasure(Vec values) : PositiveMeasure(LatticeVector(std::move(values))) {}

    const LatticeVector& base() const { return base_; }
    std::size_t size() const { return base_.size(); }
    double operator[](std::size_t i) const { return base_[i]; }
    const Vec& values() const { return base_.values(); }
    double mass() const { return sum(base_.values()); }

private:
    LatticeVector base_;
};

// [lo, hi] in the componentwise order; lo <= hi fails -> the interval is
// recorded as empty rather than rejected.
struct OrderInterval {
    LatticeVector lo, hi;
    bool empty = false;

    OrderInterval(LatticeVector l, LatticeVector h) : lo(std::move(l)), hi(std::move(h)) {
        check_same_space(lo, hi, "OrderInterval");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (lo[i] > hi[i]) {
                empty = true;
                break;
            }
    }

    bool contains(const LatticeVector& m, double tol = 0.0) const {
        if (empty) return false;
        check_same_space(lo, m, "OrderInterval::contains");
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m[i] < lo[i] - tol || m[i] > hi[i] + tol) return false;
        return true;
    }
};

// meet_i = min, join_i = max. meet + join reproduces u + v with the same
// floating additions, and join - meet equals |u - v| componentwise.
inline std::pair<LatticeVector, LatticeVector> meet_join(const LatticeVector& u, const LatticeVector& v) {
    check_same_space(u, v, "meet_join");
    Vec mt(u.size()), jn(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        mt[i] = std::min(u[i], v[i]);
        jn[i] = std::max(u[i], v[i]);
    }
    return {u.with_values(std::move(mt)), u.with_values(std::move(jn))};
}

inline LatticeVector meet(const LatticeVector& u, const LatticeVector& v) { return meet_join(u, v).first; }
inline LatticeVector join(const LatticeVector& u, const LatticeVector& v) { return meet_join(u, v).second; }

inline LatticeVector positive_part(const LatticeVector& u) {
    Vec r(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) r[i] = std::max(u[i], 0.0);
    return u.with_values(std::move(r));
}

inline LatticeVector negative_part(const LatticeVector& u) {
    Vec r(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) r[i] = std::max(-u[i], 0.0);
    return u.with_values(std::move(r));
}

struct JordanDecomposition {
    PositiveMeasure pos, neg;
    double tv = 0;  // total variation norm = pos mass + neg mass
};

// Unique split into mutually singular positive and negative parts. On atoms
// the Hahn decomposition collapses to the sign pattern of sigma.
inline JordanDecomposition jordan_decompose(const LatticeVector& sigma) {
    JordanDecomposition d{PositiveMeasure(positive_part(sigma)), PositiveMeasure(negative_part(sigma)), 0.0};
    for (std::size_t i = 0; i < sigma.size(); ++i) d.tv += d.pos[i] + d.neg[i];
    return d;
}

inline double tv_norm(const LatticeVector& sigma) { return jordan_decompose(sigma).tv; }

// mu1 <= mu2 on U: every atom of U is a positive atom of mu2 - mu1 (up to
// tol), which in the finite case is the same as positivity on all subsets of U.
inline bool leq_on_set(const LatticeVector& mu1, const LatticeVector& mu2,
                       const std::vector<std::size_t>& U, double tol = 1e-9,
                       std::size_t* witness = nullptr) {
    check_same_space(mu1, mu2, "leq_on_set");
    for (std::size_t i : U) {
        if (i >= mu1.size()) throw ValidationError("leq_on_set: index out of range: " + std::to_string(i));
        if (mu2[i] - mu1[i] < -tol) {
            if (witness) *witness = i;
            return false;
        }
    }
    return true;
}

inline bool leq(const LatticeVector& a, const LatticeVector& b, double tol = 1e-9,
                std::size_t* witness = nullptr) {
    std::vector<std::size_t> all(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) all[i] = i;
    return leq_on_set(a, b, all, tol, witness);
}

struct IntervalLinearMax {
    double value = 0;
    LatticeVector argmax;
};

// max_{m in [lo,hi]} <m, phi> = <hi, phi+> - <lo, phi->, attained by picking
// hi where phi > 0 and lo elsewhere.
inline IntervalLinearMax interval_linear_max(const OrderInterval& interval, const LatticeVector& phi) {
    if (interval.empty) throw PreconditionError("interval_linear_max: empty order interval");
    check_same_space(interval.lo, phi, "interval_linear_max");
    Vec arg(phi.size());
    double value = 0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        arg[i] = phi[i] > 0 ? interval.hi[i] : interval.lo[i];
        value += arg[i] * phi[i];
    }
    return {value, phi.with_values(std::move(arg))};
}

// Density h with d mu1' = (1-h) d mu1 + h d mu2. The lemma pins h only on the
// support of |mu1 - mu2|; off that support we set h = 0.
inline LatticeVector density_split(const LatticeVector& mu1, const LatticeVector& mu2,
                                   const LatticeVector& mu1p, double tol = 1e-9) {
    check_same_space(mu1, mu2, "density_split");
    check_same_space(mu1, mu1p, "density_split");
    auto [lo, hi] = meet_join(mu1, mu2);
    for (std::size_t i = 0; i < mu1.size(); ++i)
        if (mu1p[i] < lo[i] - tol || mu1p[i] > hi[i] + tol)
            throw PreconditionError("density_split: mu1' outside [mu1^mu2, mu1 v mu2] at index " +
                                    std::to_string(i));
    Vec h(mu1.size(), 0.0);
    for (std::size_t i = 0; i < mu1.size(); ++i) {
        const double denom = mu2[i] - mu1[i];
        if (std::abs(denom) > tol) h[i] = std::clamp((mu1p[i] - mu1[i]) / denom, 0.0, 1.0);
    }
    return mu1.with_values(std::move(h));
}

// Atom indices where |a - b| exceeds atol: the finite-space support of a - b.
inline std::vector<std::size_t> support_of_difference(const LatticeVector& a, const LatticeVector& b,
                                                      double atol = 1e-12) {
    check_same_space(a, b, "support_of_difference");
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > atol) s.push_back(i);
    return s;
}

}  // namespace lot
