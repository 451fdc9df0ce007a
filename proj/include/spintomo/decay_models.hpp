#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spin.hpp"

namespace spintomo {

enum class Channel { spin_half, w_massless, w_massive, z_dilepton, projector, custom };

/// Parameters of the physical channel. Couplings enter only through |c|^2.
struct ChannelParams {
    std::optional<double> kappa;
    std::optional<double> v;
    std::optional<double> c_left;
    std::optional<double> c_right;
    bool scalar_convention = false;
};

/**
 * A decay channel's diagonal Kraus operator K and measurement operator
 * F = K^dagger K in the frame whose quantization axis is the daughter
 * direction. Only the diagonal of F is stored.
 *
 * `mirrored` marks the W- style rule: the operator at direction n is the
 * stored one evaluated at -n (theta -> pi - theta, phi -> phi + pi).
 */
struct MeasurementModel {
    std::string name;
    Channel channel = Channel::custom;
    int dim = 0;
    RVector kraus;  ///< |K_mm|, phases dropped
    RVector f;      ///< diagonal of F
    bool mirrored = false;
    bool projective = false;
    /// Weight of a j=0 component sharing the normalization (massive W, scalar convention).
    double scalar_weight = 0.0;
    ChannelParams params;

    CMatrix f_matrix() const { return f.cast<cplx>().asDiagonal(); }
    CMatrix kraus_matrix() const { return kraus.cast<cplx>().asDiagonal(); }

    /// Diagonal of the operator acting along +n, i.e. with the mirror rule folded in (reversed order).
    RVector effective_f() const { return mirrored ? RVector(f.reverse()) : f; }

    double trace() const { return f.sum(); }

    /// F rotated to point along n.
    CMatrix rotated(const Direction& n) const {
        return rotation_for(dim).rotate_diagonal(f, mirrored ? n.opposite() : n);
    }

    /// Throws DomainError if F is not Hermitian PSD diagonal with the expected trace.
    void check() const {
        require(dim >= 2 && dim <= max_dim, "MeasurementModel '" + name + "': dimension out of range");
        require(f.size() == dim && kraus.size() == dim, "MeasurementModel '" + name + "': diagonal length mismatch");
        for (Eigen::Index i = 0; i < f.size(); ++i)
            require(f[i] >= -1e-12 && std::isfinite(f[i]), "MeasurementModel '" + name + "': F is not PSD");
        require(std::abs(f.sum() + scalar_weight - 1.0) < 1e-12,
                "MeasurementModel '" + name + "': tr(F) + scalar weight is not 1");
    }
};

namespace detail {

inline bool is_idempotent(const RVector& f) {
    for (Eigen::Index i = 0; i < f.size(); ++i)
        if (std::abs(f[i] * f[i] - f[i]) > 1e-12) return false;
    return true;
}

inline MeasurementModel finish_model(MeasurementModel m) {
    m.projective = detail::is_idempotent(m.f);
    m.check();
    return m;
}

inline std::string format_number(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

}  // namespace detail

/// Model with an arbitrary PSD diagonal F of unit trace; K = sqrt(F).
inline MeasurementModel model_from_diagonal(std::string name, const RVector& f, bool mirrored = false) {
    MeasurementModel m;
    m.name = std::move(name);
    m.channel = Channel::custom;
    m.dim = static_cast<int>(f.size());
    m.f = f;
    require((f.array() >= 0.0).all(), "model_from_diagonal: F must be PSD");
    m.kraus = f.cwiseSqrt();
    m.mirrored = mirrored;
    return detail::finish_model(std::move(m));
}

/// Spin-half POVM element F_+ = (I + kappa sigma_3)/2.
inline MeasurementModel model_spin_half(double kappa) {
    require(std::isfinite(kappa) && std::abs(kappa) <= 1.0,
            "model_spin_half: |kappa| must be <= 1, got " + detail::format_number(kappa));
    MeasurementModel m;
    m.name = "spinhalf:kappa=" + detail::format_number(kappa);
    m.channel = Channel::spin_half;
    m.dim = 2;
    m.f = RVector{{0.5 * (1.0 + kappa), 0.5 * (1.0 - kappa)}};
    m.kraus = m.f.cwiseSqrt();
    m.params.kappa = kappa;
    return detail::finish_model(std::move(m));
}

/// W -> l nu with a massless charged lepton: projector onto m=+1 along the lepton (W-: mirrored).
inline MeasurementModel model_W_massless(int charge) {
    require(charge == 1 || charge == -1, "model_W_massless: charge must be +1 or -1");
    MeasurementModel m;
    m.name = charge > 0 ? "W+" : "W-";
    m.channel = Channel::w_massless;
    m.dim = 3;
    m.f = RVector{{1.0, 0.0, 0.0}};
    m.kraus = m.f;
    m.mirrored = charge < 0;
    return detail::finish_model(std::move(m));
}

/// f_v = 4/(3+v): rescales the j=1 block to unit trace when no scalar component is allowed.
inline double massive_w_norm_factor(double v) { return 4.0 / (3.0 + v); }

/**
 * W -> l nu with a massive charged lepton of speed v in the W rest frame.
 * The j=1 block of F is diag((1+v)/2, (1-v)/4, 0). Without the scalar
 * convention (default) it is rescaled by f_v to unit trace; with it the
 * remaining (1-v)/4 is carried as a j=0 weight.
 */
inline MeasurementModel model_W_massive(double v, bool scalar_convention = false, int charge = 1) {
    require(std::isfinite(v) && v > 0.0 && v <= 1.0,
            "model_W_massive: lepton speed must be in (0, 1], got " + detail::format_number(v));
    require(charge == 1 || charge == -1, "model_W_massive: charge must be +1 or -1");
    MeasurementModel m;
    m.name = std::string(charge > 0 ? "W+" : "W-") + "massive:v=" + detail::format_number(v) +
             (scalar_convention ? ",scalar=1" : "");
    m.channel = Channel::w_massive;
    m.dim = 3;
    // chi = p/(E+m) satisfies v = 2 chi / (1 + chi^2).
    const double chi = v / (1.0 + std::sqrt(1.0 - v * v));
    const double kn = 1.0 / std::sqrt(2.0 * (1.0 + chi * chi));
    RVector k{{(1.0 + chi) * kn, (1.0 - chi) / std::sqrt(2.0) * kn, 0.0}};
    RVector f{{0.5 * (1.0 + v), 0.25 * (1.0 - v), 0.0}};
    if (scalar_convention) {
        m.scalar_weight = 0.25 * (1.0 - v);
    } else {
        const double fv = massive_w_norm_factor(v);
        f *= fv;
        k *= std::sqrt(fv);
    }
    m.f = f;
    m.kraus = k;
    m.mirrored = charge < 0;
    m.params.v = v;
    m.params.scalar_convention = scalar_convention;
    return detail::finish_model(std::move(m));
}

/// Z boson lepton-side couplings: c_L = (c_V + c_A)/2, c_R = (c_V - c_A)/2.
struct ZCouplings {
    double c_left;
    double c_right;

    static ZCouplings from_vector_axial(double c_vector, double c_axial) {
        return {0.5 * (c_vector + c_axial), 0.5 * (c_vector - c_axial)};
    }
    /// Charged leptons: c_A = -0.5064, c_V = -0.0398.
    static ZCouplings standard_model_leptons() { return from_vector_axial(-0.0398, -0.5064); }
};

/// Z -> l+ l- viewed along the l+: F = diag(|cR|^2, 0, |cL|^2)/(|cR|^2 + |cL|^2).
inline MeasurementModel model_Z_dilepton(double c_left, double c_right) {
    const double l2 = c_left * c_left, r2 = c_right * c_right;
    require(std::isfinite(l2) && std::isfinite(r2) && l2 + r2 > 0.0,
            "model_Z_dilepton: couplings must not both vanish");
    MeasurementModel m;
    m.name = "Z:cL=" + detail::format_number(c_left) + ",cR=" + detail::format_number(c_right);
    m.channel = Channel::z_dilepton;
    m.dim = 3;
    const double norm = l2 + r2;
    m.f = RVector{{r2 / norm, 0.0, l2 / norm}};
    m.kraus = RVector{{std::abs(c_right), 0.0, std::abs(c_left)}} / std::sqrt(norm);
    m.params.c_left = c_left;
    m.params.c_right = c_right;
    return detail::finish_model(std::move(m));
}

inline MeasurementModel model_Z_dilepton(const ZCouplings& c) { return model_Z_dilepton(c.c_left, c.c_right); }

/// Projective measurement onto the basis state with index `level` (0 is m = +j).
inline MeasurementModel model_projector(int d, int level = 0) {
    require(d >= 2 && d <= max_dim, "model_projector: dimension out of range");
    require(level >= 0 && level < d, "model_projector: level out of range");
    RVector f = RVector::Zero(d);
    f[level] = 1.0;
    MeasurementModel m = model_from_diagonal("projector:d=" + std::to_string(d) + ",level=" + std::to_string(level), f);
    m.channel = Channel::projector;
    return m;
}

/// Diagnostics for a candidate POVM.
struct PovmReport {
    int dim = 0;
    double max_deviation = 0.0;  ///< max |sum F - I|
    bool complete = false;       ///< max_deviation < 1e-12
    std::vector<bool> psd;
    std::vector<bool> hermitian;
};

/// Checks sum_l F_l = I (each F in its +n orientation). Never throws for an incomplete set.
inline PovmReport validate_povm(const std::vector<MeasurementModel>& models) {
    require(!models.empty(), "validate_povm: empty model list");
    PovmReport r;
    r.dim = models.front().dim;
    RVector sum = RVector::Zero(r.dim);
    for (const auto& m : models) {
        require(m.dim == r.dim, "validate_povm: models have different dimensions");
        const RVector f = m.effective_f();
        sum += f;
        r.psd.push_back((f.array() >= -1e-12).all());
        r.hermitian.push_back(is_hermitian(m.f_matrix()));
    }
    r.max_deviation = (sum - RVector::Ones(r.dim)).cwiseAbs().maxCoeff();
    r.complete = r.max_deviation < 1e-12;
    return r;
}

namespace detail {

/// Splits "key=value,key=value" into a map; throws on malformed items.
inline std::map<std::string, std::string> parse_kv(const std::string& text, const std::string& context) {
    std::map<std::string, std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        require(eq != std::string::npos && eq > 0, context + ": malformed parameter '" + item + "'");
        out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

inline double parse_double(const std::string& s, const std::string& context) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw DomainError(context + ": not a number: '" + s + "'");
    }
    require(pos == s.size(), context + ": not a number: '" + s + "'");
    return v;
}

inline double take(std::map<std::string, std::string>& kv, const std::string& key, const std::string& context) {
    const auto it = kv.find(key);
    require(it != kv.end(), context + ": missing parameter '" + key + "'");
    const double v = parse_double(it->second, context);
    kv.erase(it);
    return v;
}

inline void require_empty(const std::map<std::string, std::string>& kv, const std::string& context) {
    if (!kv.empty()) throw DomainError(context + ": unknown parameter '" + kv.begin()->first + "'");
}

}  // namespace detail

/**
 * Builds a model from a preset name:
 *   W+, W-, W+massive:v=0.75[,scalar=1], W-massive:v=..., Z:SM, Z:cL=..,cR=..,
 *   tophalf:kappa=1.0, bquark:kappa=-0.41, spinhalf:kappa=..,
 *   projector:d=4[,level=0], uniform:d=3
 */
inline MeasurementModel model_from_preset(const std::string& preset) {
    if (preset == "Z:SM") {
        auto z = model_Z_dilepton(ZCouplings::standard_model_leptons());
        z.name = preset;
        return z;
    }
    const auto colon = preset.find(':');
    const std::string head = preset.substr(0, colon);
    auto kv = detail::parse_kv(colon == std::string::npos ? "" : preset.substr(colon + 1), "model '" + preset + "'");
    const std::string ctx = "model '" + preset + "'";
    MeasurementModel m;
    if (head == "W+" || head == "W-") {
        detail::require_empty(kv, ctx);
        return model_W_massless(head == "W+" ? 1 : -1);
    } else if (head == "W+massive" || head == "W-massive") {
        const double v = detail::take(kv, "v", ctx);
        bool scalar = false;
        if (kv.count("scalar")) scalar = detail::take(kv, "scalar", ctx) != 0.0;
        detail::require_empty(kv, ctx);
        m = model_W_massive(v, scalar, head == "W+massive" ? 1 : -1);
    } else if (head == "Z") {
        const double cl = detail::take(kv, "cL", ctx);
        const double cr = detail::take(kv, "cR", ctx);
        detail::require_empty(kv, ctx);
        m = model_Z_dilepton(cl, cr);
    } else if (head == "tophalf" || head == "bquark" || head == "spinhalf") {
        const double kappa = detail::take(kv, "kappa", ctx);
        detail::require_empty(kv, ctx);
        m = model_spin_half(kappa);
    } else if (head == "projector") {
        const int d = static_cast<int>(detail::take(kv, "d", ctx));
        int level = 0;
        if (kv.count("level")) level = static_cast<int>(detail::take(kv, "level", ctx));
        detail::require_empty(kv, ctx);
        m = model_projector(d, level);
    } else if (head == "uniform") {
        const int d = static_cast<int>(detail::take(kv, "d", ctx));
        detail::require_empty(kv, ctx);
        require(d >= 2 && d <= max_dim, ctx + ": dimension out of range");
        m = model_from_diagonal("", RVector::Constant(d, 1.0 / d));
    } else {
        throw DomainError("unknown model preset '" + preset + "'");
    }
    m.name = preset;
    return m;
}

}  // namespace spintomo
