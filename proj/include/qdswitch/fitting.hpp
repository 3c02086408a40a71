#ifndef QDSWITCH_FITTING_HPP
#define QDSWITCH_FITTING_HPP

// Parameter recovery: Stark curve (linear least squares in mu, alpha),
// reflectivity spectra (Levenberg-Marquardt over a chosen free set), and
// DC contrast calibration of (gamma_perp, screening).

#include "qdswitch/cqed.hpp"
#include "qdswitch/electrostatics.hpp"
#include "qdswitch/errors.hpp"
#include "qdswitch/least_squares.hpp"
#include "qdswitch/switching.hpp"
#include "qdswitch/units.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace qdswitch {

struct FitParameter {
    std::string name;
    double value = 0.0;
    std::string unit;
    std::optional<double> variance;
};

struct FitResult {
    std::vector<FitParameter> parameters;
    double residual_norm = 0.0;
    double gradient_norm = 0.0;
    bool converged = false;
    int iterations = 0;

    const FitParameter& parameter(std::string_view name) const
    {
        for (const auto& p : parameters)
            if (p.name == name)
                return p;
        throw domain_error("fit result has no parameter '" + std::string(name) + "'");
    }
    double value(std::string_view name) const { return parameter(name).value; }
};

struct ShiftPoint {
    double voltage = 0.0; // reverse bias, V
    double shift = 0.0;   // meV
};

struct ShiftDataset {
    std::vector<ShiftPoint> points;
    std::vector<double> weights; // empty -> unit weights
};

// ---------------------------------------------------------------------------
// Stark curve

// Weighted least squares for dE = mu*F - alpha*F^2, solved through the 2x2
// normal equations. Points below onset carry no information but are kept.
inline FitResult fit_stark_curve(const ShiftDataset& data, const ElectrostaticParams& electro,
                                 FieldPolarity polarity = FieldPolarity::toward_electrode)
{
    electro.validate();
    const auto& pts = data.points;
    if (pts.size() < 3)
        throw domain_error("Stark fit needs at least 3 points");
    if (!data.weights.empty() && data.weights.size() != pts.size())
        throw domain_error("weights must match the number of points");
    {
        std::vector<double> v;
        for (const auto& p : pts) {
            if (!std::isfinite(p.voltage) || !std::isfinite(p.shift))
                throw domain_error("non-finite value in shift dataset");
            v.push_back(p.voltage);
        }
        std::sort(v.begin(), v.end());
        if (std::adjacent_find(v.begin(), v.end()) != v.end())
            throw domain_error("shift dataset voltages must be distinct");
    }

    Eigen::MatrixXd design(pts.size(), 2);
    Eigen::VectorXd rhs(pts.size());
    Eigen::VectorXd w = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double f = static_cast<int>(polarity) * field_at_cavity(electro, pts[i].voltage);
        design(i, 0) = f;
        design(i, 1) = -f * f;
        rhs[i] = pts[i].shift;
        if (!data.weights.empty()) {
            if (!(data.weights[i] >= 0.0))
                throw domain_error("weights must be non-negative");
            w[i] = data.weights[i];
        }
    }

    const Eigen::Matrix2d normal = design.transpose() * w.asDiagonal() * design;
    const Eigen::Vector2d moment = design.transpose() * w.asDiagonal() * rhs;
    const double det = normal.determinant();
    const double scale = normal(0, 0) * normal(1, 1);
    if (!(scale > 0.0) || !(std::abs(det) > 1e-12 * scale))
        throw degenerate_fit_error("Stark fit is rank deficient: need at least two distinct non-zero fields");

    const Eigen::Matrix2d inverse = normal.inverse();
    const Eigen::Vector2d coef = inverse * moment;
    const Eigen::VectorXd resid = design * coef - rhs;
    const double wss = resid.cwiseProduct(resid).dot(w);

    FitResult out;
    out.residual_norm = std::sqrt(wss);
    out.converged = true;
    out.iterations = 1;
    out.gradient_norm = (design.transpose() * w.asDiagonal() * resid).cwiseAbs().maxCoeff();
    const auto dof = static_cast<double>(pts.size()) - 2.0;
    const double sigma2 = dof > 0 ? wss / dof : 0.0;
    out.parameters = {{"mu", coef[0], "meV um/V", sigma2 * inverse(0, 0)},
                      {"alpha", coef[1], "meV um^2/V^2", sigma2 * inverse(1, 1)}};
    return out;
}

inline StarkCoefficients stark_coefficients(const FitResult& r)
{
    StarkCoefficients c;
    c.mu = r.value("mu");
    c.alpha = r.value("alpha");
    return c;
}

// ---------------------------------------------------------------------------
// Spectrum fit

namespace detail {

inline bool log_scaled(CqedParam p)
{
    return p == CqedParam::g || p == CqedParam::kappa || p == CqedParam::gamma_perp || p == CqedParam::amplitude;
}

} // namespace detail

// Fit reflectivity_spectrum to measured data, varying only `free`. Rates
// and amplitude are optimized in log space so they stay positive.
// Non-convergence is reported through FitResult::converged.
inline FitResult fit_spectrum(const Spectrum& data, const CqedParams& initial, const std::vector<CqedParam>& free,
                              const LmOptions& options = {})
{
    initial.validate();
    if (data.size() == 0)
        throw domain_error("spectrum is empty");
    for (std::size_t i = 0; i < data.size(); ++i)
        if (!std::isfinite(data.detunings[i]) || !std::isfinite(data.intensities[i]))
            throw domain_error("spectrum contains NaN or infinite values");
    detail::require_grid(data.detunings);
    if (free.empty())
        throw domain_error("no free parameters");
    if (std::set<CqedParam>(free.begin(), free.end()).size() != free.size())
        throw domain_error("free parameter listed twice");
    if (free.size() > data.size())
        throw domain_error("more free parameters than data points");

    for (CqedParam p : free)
        if (detail::log_scaled(p) && !(field_of(initial, p) > 0.0))
            throw domain_error("initial " + std::string(name_of(p)) + " must be > 0 when free");

    const auto n = static_cast<Eigen::Index>(free.size());
    const auto m = static_cast<Eigen::Index>(data.size());

    auto unpack = [&](const Eigen::VectorXd& x) {
        CqedParams p = initial;
        for (Eigen::Index k = 0; k < n; ++k)
            field_of(p, free[k]) = detail::log_scaled(free[k]) ? std::exp(x[k]) : x[k];
        return p;
    };
    auto residuals = [&](const Eigen::VectorXd& x) {
        const CqedParams p = unpack(x);
        Eigen::VectorXd r(m);
        for (Eigen::Index i = 0; i < m; ++i)
            r[i] = reflectivity(p, data.detunings[i]) - data.intensities[i];
        return r;
    };
    auto jacobian = [&](const Eigen::VectorXd& x) {
        const CqedParams p = unpack(x);
        Eigen::MatrixXd J(m, n);
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto grad = reflectivity_gradient(p, data.detunings[i]);
            for (Eigen::Index k = 0; k < n; ++k) {
                const double d = grad[static_cast<std::size_t>(free[k])];
                J(i, k) = detail::log_scaled(free[k]) ? d * field_of(p, free[k]) : d;
            }
        }
        return J;
    };

    Eigen::VectorXd x0(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double v = field_of(initial, free[k]);
        x0[k] = detail::log_scaled(free[k]) ? std::log(v) : v;
    }

    const LmReport rep = levenberg_marquardt(residuals, jacobian, x0, options);
    const CqedParams best = unpack(rep.x);

    FitResult out;
    out.residual_norm = rep.residual_norm;
    out.gradient_norm = rep.gradient_norm;
    out.converged = rep.converged;
    out.iterations = rep.iterations;

    // Covariance in natural units via the Jacobian chain factor.
    std::optional<Eigen::MatrixXd> cov;
    if (m > n) {
        const Eigen::MatrixXd jtj = rep.jacobian.transpose() * rep.jacobian;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
        if (lu.isInvertible())
            cov = lu.inverse() * (rep.residual_norm * rep.residual_norm / static_cast<double>(m - n));
    }
    for (std::size_t k = 0; k < free.size(); ++k)
        out.parameters.push_back({std::string(name_of(free[k])), field_of(best, free[k]),
                                  (free[k] == CqedParam::amplitude || free[k] == CqedParam::background) ? "" : "rad/ns",
                                  std::nullopt});
    if (cov)
        for (Eigen::Index k = 0; k < n; ++k) {
            const double chain = detail::log_scaled(free[k]) ? field_of(best, free[k]) : 1.0;
            out.parameters[k].variance = (*cov)(k, k) * chain * chain;
        }
    return out;
}

inline CqedParams apply_fit(CqedParams p, const FitResult& r)
{
    for (const auto& fp : r.parameters)
        if (auto which = cqed_param_from_name(fp.name))
            field_of(p, *which) = fp.value;
    return p;
}

// ---------------------------------------------------------------------------
// Contrast calibration

// On resonance the dip ratio is (1+C)^-2, so a fully detuned on-state
// with contrast r needs C = sqrt(r) - 1.
inline double cooperativity_for_contrast(double ratio)
{
    if (!(ratio >= 1.0))
        throw domain_error("on/off ratio must be >= 1");
    return std::sqrt(ratio) - 1.0;
}

// gamma_perp = g^2/(C kappa); infinite for ratio 1.
inline double gamma_for_contrast(double ratio, double g, double kappa)
{
    const double c = cooperativity_for_contrast(ratio);
    if (c == 0.0)
        return std::numeric_limits<double>::infinity();
    return g * g / (c * kappa);
}

struct ContrastPoint {
    double voltage = 0.0; // reverse bias of the on-state, V
    double ratio = 1.0;   // measured DC on/off against the reference bias
};

struct ContrastFitOptions {
    double reference_voltage = 0.0;
    LmOptions lm{};
};

// Solve for (gamma_perp, screening) so the model's DC on/off ratios between
// the reference bias and each point's bias match the data. With a single
// point only gamma_perp is free and the model's screening is kept.
inline FitResult fit_contrast(const std::vector<ContrastPoint>& points, const SwitchModel& model,
                              const ContrastFitOptions& options = {})
{
    model.validate();
    if (points.empty())
        throw domain_error("contrast fit needs at least one target");
    for (const auto& p : points) {
        if (!std::isfinite(p.ratio) || p.ratio < 1.0)
            throw domain_error("on/off targets must be >= 1, got " + std::to_string(p.ratio));
        detail::require_reverse_bias(p.voltage);
    }
    const bool fit_screening = points.size() >= 2;

    auto logistic = [](double u) { return 1.0 / (1.0 + std::exp(-u)); };
    auto logit = [](double s) { return std::log(s / (1.0 - s)); };

    auto model_at = [&](const Eigen::VectorXd& x) {
        SwitchModel m = model;
        m.cavity.gamma_perp = std::exp(x[0]);
        if (fit_screening)
            m.device.screening.value = logistic(x[1]);
        return m;
    };
    auto residuals = [&](const Eigen::VectorXd& x) {
        const SwitchModel m = model_at(x);
        Eigen::VectorXd r(static_cast<Eigen::Index>(points.size()));
        for (std::size_t i = 0; i < points.size(); ++i)
            r[static_cast<Eigen::Index>(i)] = m.dc_on_off(options.reference_voltage, points[i].voltage) - points[i].ratio;
        return r;
    };
    auto jacobian = [&](const Eigen::VectorXd& x) { return numeric_jacobian(residuals, x, 1e-6); };

    // Deterministic coarse scan for a starting point:
    // gamma/2pi over 0.1..1000 GHz, s over 0.01..0.99.
    const int n = fit_screening ? 2 : 1;
    Eigen::VectorXd start(n);
    double best = std::numeric_limits<double>::infinity();
    const int gamma_steps = 81;
    const int s_steps = fit_screening ? 50 : 1;
    for (int i = 0; i < gamma_steps; ++i) {
        const double gamma = units::ghz_to_angular(std::pow(10.0, -1.0 + 4.0 * i / (gamma_steps - 1)));
        for (int j = 0; j < s_steps; ++j) {
            Eigen::VectorXd x(n);
            x[0] = std::log(gamma);
            if (fit_screening)
                x[1] = logit(0.01 + 0.98 * j / (s_steps - 1));
            const double c = residuals(x).squaredNorm();
            if (c < best) {
                best = c;
                start = x;
            }
        }
    }

    const LmReport rep = levenberg_marquardt(residuals, jacobian, start, options.lm);
    const SwitchModel fitted = model_at(rep.x);

    FitResult out;
    out.residual_norm = rep.residual_norm;
    out.gradient_norm = rep.gradient_norm;
    out.converged = rep.converged;
    out.iterations = rep.iterations;
    out.parameters.push_back({"gamma_perp", fitted.cavity.gamma_perp, "rad/ns", std::nullopt});
    out.parameters.push_back({"screening", fitted.device.screening.value, "", std::nullopt});
    return out;
}

inline SwitchModel apply_contrast_fit(SwitchModel m, const FitResult& r)
{
    m.cavity.gamma_perp = r.value("gamma_perp");
    m.device.screening.value = r.value("screening");
    return m;
}

// ---------------------------------------------------------------------------
// Synthetic data

// Multiplicative Gaussian noise: v -> v*(1 + rel_sigma*N(0,1)), seeded.
inline std::vector<double> add_relative_noise(std::vector<double> values, double rel_sigma, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : values)
        v *= 1.0 + rel_sigma * normal(rng);
    return values;
}

} // namespace qdswitch

#endif
