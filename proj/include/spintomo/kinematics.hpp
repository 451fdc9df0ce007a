#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "common.hpp"
#include "spin.hpp"

namespace spintomo {

using Vec3 = Eigen::Vector3d;

/// Four-momentum (E, px, py, pz) in GeV.
struct FourVector {
    double e = 0.0;
    Vec3 p = Vec3::Zero();

    FourVector() = default;
    FourVector(double e_, double px, double py, double pz) : e(e_), p(px, py, pz) {}
    FourVector(double e_, const Vec3& p_) : e(e_), p(p_) {}

    double mass2() const { return e * e - p.squaredNorm(); }
    double mass() const { return std::sqrt(std::max(0.0, mass2())); }

    /// Velocity of the frame in which this momentum is at rest.
    Vec3 velocity() const { return p / e; }

    FourVector operator+(const FourVector& o) const { return {e + o.e, p + o.p}; }
    FourVector operator-(const FourVector& o) const { return {e - o.e, p - o.p}; }
    bool operator==(const FourVector&) const = default;
};

/**
 * Active boost by velocity beta: the momentum as seen in a frame moving
 * with velocity -beta. boost(q, -q.velocity()) brings q to rest.
 */
inline FourVector boost(const FourVector& q, const Vec3& beta) {
    const double b2 = beta.squaredNorm();
    if (b2 == 0.0) return q;
    require(b2 < 1.0, "boost: velocity must satisfy |beta| < 1");
    const double gamma = 1.0 / std::sqrt(1.0 - b2);
    const double bp = beta.dot(q.p);
    const double k = (gamma - 1.0) / b2;
    return {gamma * (q.e + bp), q.p + (k * bp + gamma * q.e) * beta};
}

/// q seen in the rest frame of `frame`.
inline FourVector to_rest_frame(const FourVector& q, const FourVector& frame) {
    require(frame.mass2() > 0.0, "to_rest_frame: frame momentum is not timelike");
    return boost(q, -frame.velocity());
}

/**
 * Right-handed orthonormal triplet {n, r, k} built from the parent
 * direction k and a beam direction p:
 *   y = p.k, r = sqrt(1 - y^2), r_hat = (p - y k)/r, n_hat = (p x k)/r.
 */
struct BeamBasis {
    Vec3 n;
    Vec3 r;
    Vec3 k;

    /// Direction coordinates with x = n, y = r, z = k; phi runs from n toward r.
    Direction direction_of(const Vec3& v) const {
        const double norm = v.norm();
        require(norm > 0.0, "BeamBasis: zero-length direction");
        const Vec3 u = v / norm;
        double phi = std::atan2(u.dot(r), u.dot(n));
        if (phi < 0.0) phi += two_pi;
        if (phi >= two_pi) phi -= two_pi;
        return {std::clamp(u.dot(k), -1.0, 1.0), phi};
    }

    Vec3 vector_of(const Direction& d) const {
        const double s = d.sin_theta();
        return s * std::cos(d.phi) * n + s * std::sin(d.phi) * r + d.cos_theta * k;
    }
};

inline constexpr double collinear_limit = 1e-8;

inline BeamBasis build_beam_basis(const Vec3& parent_dir, const Vec3& beam_dir) {
    require(parent_dir.norm() > 0.0 && beam_dir.norm() > 0.0, "build_beam_basis: zero-length direction");
    const Vec3 k = parent_dir.normalized();
    const Vec3 p = beam_dir.normalized();
    const double y = p.dot(k);
    const Vec3 pk = p.cross(k);
    // |p x k| = sqrt(1 - y^2) without cancellation near y = +-1
    const double r = pk.norm();
    if (r < collinear_limit)
        throw DomainError("build_beam_basis: parent direction is collinear with the beam (r = " + std::to_string(r) +
                          ")");
    return {pk / r, (p - y * k).normalized(), k};
}

}  // namespace spintomo
