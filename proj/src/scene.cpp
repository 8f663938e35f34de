#include "wdma/scene.hpp"
#include "wdma/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace wdma {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

SystemConfig SystemConfig::table_defaults(int num_users, int pas_per_waveguide, int num_slots) {
    SystemConfig c;
    c.num_users = num_users;
    c.pas_per_waveguide = pas_per_waveguide;
    c.num_slots = num_slots;
    c.carrier_freq = 28e9;
    c.refractive_index = 1.4;
    c.height = 3.0;
    c.strip_width = 6.0;
    c.strip_length = 10.0;
    c.max_power = dbm_to_watts(20.0);
    c.noise_power.assign(static_cast<std::size_t>(num_users), dbm_to_watts(-90.0));
    c.min_rate.assign(static_cast<std::size_t>(num_users), 2.0);
    c.min_spacing = derive_wavelengths(c).free_space / 2.0;
    return c;
}

void SystemConfig::broadcast_per_user() {
    const auto k = static_cast<std::size_t>(std::max(num_users, 0));
    auto fill = [k](std::vector<double>& v) {
        if (v.empty() || v.size() == k) return;
        v.assign(k, v.front());
    };
    fill(noise_power);
    fill(min_rate);
}

void SystemConfig::validate() const {
    auto fail = [](const std::string& msg) { throw InvalidConfig(msg); };
    if (num_users < 1) fail("num_users must be >= 1");
    if (pas_per_waveguide < 1) fail("pas_per_waveguide must be >= 1");
    if (num_slots < pas_per_waveguide) fail("num_slots must be >= pas_per_waveguide");
    if (!(carrier_freq > 0.0)) fail("carrier_freq must be positive");
    if (!(refractive_index >= 1.0)) fail("refractive_index must be >= 1");
    if (!(light_speed > 0.0)) fail("light_speed must be positive");
    if (!(height > 0.0)) fail("height must be positive");
    if (!(strip_width > 0.0)) fail("strip_width must be positive");
    if (!(strip_length > 0.0)) fail("strip_length must be positive");
    if (!(min_spacing >= 0.0)) fail("min_spacing must be non-negative");
    if ((pas_per_waveguide - 1) * min_spacing > strip_length)
        fail("(N-1) * min_spacing exceeds strip_length");
    if (!(max_power > 0.0)) fail("max_power must be positive");
    const auto k = static_cast<std::size_t>(num_users);
    if (noise_power.size() != k) fail("noise_power must have one entry per user");
    if (min_rate.size() != k) fail("min_rate must have one entry per user");
    for (double s : noise_power)
        if (!(s > 0.0)) fail("noise_power entries must be positive");
    for (double r : min_rate)
        if (!(r >= 0.0)) fail("min_rate entries must be non-negative");
}

Wavelengths derive_wavelengths(const SystemConfig& config) {
    if (!(config.carrier_freq > 0.0)) throw InvalidConfig("carrier_freq must be positive");
    if (!(config.refractive_index >= 1.0)) throw InvalidConfig("refractive_index must be >= 1");
    Wavelengths w;
    w.free_space = config.light_speed / config.carrier_freq;
    w.guided = w.free_space / config.refractive_index;
    w.eta = w.free_space / (4.0 * kPi);
    return w;
}

double waveguide_offset(int k, const SystemConfig& config) {
    return (k - 0.5 * (config.num_users - 1)) * config.strip_width;
}

std::pair<double, double> service_strip(int k, const SystemConfig& config) {
    const double y = waveguide_offset(k, config);
    return {y - 0.5 * config.strip_width, y + 0.5 * config.strip_width};
}

Deployment make_deployment(const SystemConfig& config, std::vector<Point3> users) {
    if (static_cast<int>(users.size()) != config.num_users)
        throw InvalidConfig("deployment needs exactly one user per waveguide");
    Deployment dep;
    dep.users = std::move(users);
    dep.height = config.height;
    dep.waveguide_y.reserve(dep.users.size());
    for (int k = 0; k < config.num_users; ++k) dep.waveguide_y.push_back(waveguide_offset(k, config));
    return dep;
}

void PinchingLayout::sort_rows() {
    for (Eigen::Index k = 0; k < positions.rows(); ++k) {
        auto row = positions.row(k);
        std::sort(row.begin(), row.end());
    }
}

bool is_feasible_continuous(const PinchingLayout& layout, const SystemConfig& config, double tol) {
    const Matrix& x = layout.positions;
    for (Eigen::Index k = 0; k < x.rows(); ++k) {
        for (Eigen::Index n = 0; n < x.cols(); ++n) {
            if (!std::isfinite(x(k, n))) return false;
            if (x(k, n) < -tol || x(k, n) > config.strip_length + tol) return false;
            if (n + 1 < x.cols() && x(k, n + 1) - x(k, n) < config.min_spacing - tol) return false;
        }
    }
    return true;
}

double slot_spacing(const SystemConfig& config) {
    if (config.num_slots < 2) return config.strip_length;
    return config.strip_length / (config.num_slots - 1);
}

double slot_position(int slot, const SystemConfig& config) {
    if (config.num_slots < 2) return 0.0;
    // Evaluated as a ratio so the last slot lands exactly on L.
    return config.strip_length * slot / (config.num_slots - 1);
}

bool is_feasible_discrete(const PinchingLayout& layout, const SystemConfig& config, double tol) {
    const Matrix& x = layout.positions;
    const double spacing = slot_spacing(config);
    for (Eigen::Index k = 0; k < x.rows(); ++k) {
        std::vector<long> slots;
        for (Eigen::Index n = 0; n < x.cols(); ++n) {
            const double v = x(k, n);
            if (!std::isfinite(v) || v < -tol || v > config.strip_length + tol) return false;
            const long s = std::lround(v / spacing);
            if (std::abs(slot_position(static_cast<int>(s), config) - v) > tol) return false;
            slots.push_back(s);
        }
        std::sort(slots.begin(), slots.end());
        if (std::adjacent_find(slots.begin(), slots.end()) != slots.end()) return false;
    }
    return true;
}

double user_pa_distance(const Point3& user, const Point3& pa) {
    const double dx = user.x - pa.x;
    const double dy = user.y - pa.y;
    const double dz = user.z - pa.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

ComplexVector free_space_channel(int user, int waveguide, const PinchingLayout& layout,
                                 const Deployment& deployment, const SystemConfig& config) {
    const Wavelengths w = derive_wavelengths(config);
    const Point3& u = deployment.users.at(static_cast<std::size_t>(user));
    const double y = deployment.waveguide_y.at(static_cast<std::size_t>(waveguide));
    const int n_pas = layout.num_pas();
    ComplexVector h(n_pas);
    for (int n = 0; n < n_pas; ++n) {
        const double r = user_pa_distance(u, {layout.positions(waveguide, n), y, deployment.height});
        h(n) = std::polar(w.eta / r, -2.0 * kPi * r / w.free_space);
    }
    return h;
}

ComplexVector waveguide_channel(int waveguide, const PinchingLayout& layout,
                                const SystemConfig& config) {
    const Wavelengths w = derive_wavelengths(config);
    const int n_pas = layout.num_pas();
    ComplexVector g(n_pas);
    for (int n = 0; n < n_pas; ++n)
        g(n) = std::polar(1.0, -2.0 * kPi * layout.positions(waveguide, n) / w.guided);
    return g;
}

EffectiveGains effective_gains(const PinchingLayout& layout, const Deployment& deployment,
                               const SystemConfig& config) {
    const int k_users = deployment.num_users();
    const int k_guides = layout.num_waveguides();
    EffectiveGains gains;
    gains.alpha.resize(k_guides, k_users);
    for (int src = 0; src < k_guides; ++src) {
        const ComplexVector g = waveguide_channel(src, layout, config);
        for (int dst = 0; dst < k_users; ++dst) {
            const ComplexVector h = free_space_channel(dst, src, layout, deployment, config);
            gains.alpha(src, dst) = (h.array() * g.array()).sum();
        }
    }
    return gains;
}

double rate_from_gains(int k, const Matrix& upsilon, const Vector& powers, double noise_floor) {
    double interference = noise_floor;
    for (Eigen::Index src = 0; src < upsilon.rows(); ++src)
        if (src != k) interference += powers(src) * upsilon(src, k);
    return std::log2(1.0 + powers(k) * upsilon(k, k) / interference);
}

double user_rate(int k, const EffectiveGains& gains, const Vector& powers,
                 const SystemConfig& config) {
    return rate_from_gains(k, gains.power_gains(), powers,
                           config.pas_per_waveguide * config.noise(k));
}

double user_rate(int k, const PinchingLayout& layout, const Vector& powers,
                 const Deployment& deployment, const SystemConfig& config) {
    return user_rate(k, effective_gains(layout, deployment, config), powers, config);
}

Vector user_rates(const EffectiveGains& gains, const Vector& powers, const SystemConfig& config) {
    const Matrix upsilon = gains.power_gains();
    Vector rates(upsilon.cols());
    for (Eigen::Index k = 0; k < upsilon.cols(); ++k)
        rates(k) = rate_from_gains(static_cast<int>(k), upsilon, powers,
                                   config.pas_per_waveguide * config.noise(static_cast<int>(k)));
    return rates;
}

Vector user_rates(const PinchingLayout& layout, const Vector& powers,
                  const Deployment& deployment, const SystemConfig& config) {
    return user_rates(effective_gains(layout, deployment, config), powers, config);
}

double sum_rate(const PinchingLayout& layout, const Vector& powers, const Deployment& deployment,
                const SystemConfig& config) {
    return user_rates(layout, powers, deployment, config).sum();
}

double sum_rate_cap(const SystemConfig& config) {
    const Wavelengths w = derive_wavelengths(config);
    const double n = config.pas_per_waveguide;
    const double amp = n * w.eta / config.height;
    double cap = 0.0;
    for (int k = 0; k < config.num_users; ++k)
        cap += std::log2(1.0 + config.max_power * amp * amp / (n * config.noise(k)));
    return cap;
}

bool powers_feasible(const Vector& powers, const SystemConfig& config, double tol) {
    if (powers.size() != config.num_users) return false;
    for (Eigen::Index k = 0; k < powers.size(); ++k)
        if (!(powers(k) >= -tol)) return false;
    return powers.sum() <= config.max_power + tol;
}

Vector equal_power_split(const SystemConfig& config) {
    return Vector::Constant(config.num_users, config.max_power / config.num_users);
}

GridSpec GridSpec::service_area(const SystemConfig& config, int nx, int ny) {
    GridSpec g;
    g.x_min = 0.0;
    g.x_max = config.strip_length;
    g.nx = nx;
    g.y_min = service_strip(0, config).first;
    g.y_max = service_strip(config.num_users - 1, config).second;
    g.ny = ny;
    return g;
}

double GridSpec::x(int i) const {
    return nx == 1 ? x_min : x_min + (x_max - x_min) * i / (nx - 1);
}

double GridSpec::y(int j) const {
    return ny == 1 ? y_min : y_min + (y_max - y_min) * j / (ny - 1);
}

double probe_gain(int waveguide, const PinchingLayout& layout, const Point3& point,
                  const Deployment& deployment, const SystemConfig& config) {
    const Wavelengths w = derive_wavelengths(config);
    const double y = deployment.waveguide_y.at(static_cast<std::size_t>(waveguide));
    std::complex<double> alpha{0.0, 0.0};
    for (int n = 0; n < layout.num_pas(); ++n) {
        const double x = layout.positions(waveguide, n);
        const double r = user_pa_distance(point, {x, y, deployment.height});
        alpha += std::polar(w.eta / r, -2.0 * kPi * (r / w.free_space + x / w.guided));
    }
    return std::norm(alpha);
}

Matrix channel_gain_map(int waveguide, const PinchingLayout& layout, const GridSpec& grid,
                        const Deployment& deployment, const SystemConfig& config) {
    if (grid.nx < 1 || grid.ny < 1) throw std::invalid_argument("channel_gain_map: empty grid");
    Matrix gain(grid.ny, grid.nx);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i)
            gain(j, i) = probe_gain(waveguide, layout, {grid.x(i), grid.y(j), 0.0}, deployment, config);
    const double peak = gain.maxCoeff();
    return gain.unaryExpr([peak](double g) { return 10.0 * std::log10(g / peak); });
}

} // namespace wdma
