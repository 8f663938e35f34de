#pragma once

// Geometry, channel model and rate evaluation for a multi-waveguide
// pinching-antenna downlink where waveguide k serves user k.
//
// Conventions used throughout the library:
//   * all quantities are SI (meters, hertz, watts); dBm only at the CLI boundary
//   * indices are 0-based; waveguide k and its served user share index k
//   * a layout is a K x N matrix, row k holding the x-coordinates of the
//     pinching antennas (PAs) on waveguide k, kept sorted ascending

#include <Eigen/Dense>

#include <complex>
#include <utility>
#include <vector>

namespace wdma {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

struct SystemConfig {
    int num_users = 2;          // K, also the number of waveguides
    int pas_per_waveguide = 4;  // N
    int num_slots = 20;         // A, candidate positions per waveguide (discrete mode)
    double carrier_freq = 28e9;
    double refractive_index = 1.4;
    double height = 3.0;        // waveguide height d
    double strip_width = 6.0;   // W
    double strip_length = 10.0; // L
    double min_spacing = 0.0;   // Delta
    double max_power = 0.1;     // P_max [W]
    std::vector<double> noise_power; // sigma_k^2 [W], one per user
    std::vector<double> min_rate;    // required rate per user [bit/s/Hz]
    double light_speed = kSpeedOfLight;

    // Simulation defaults: 28 GHz, n_eff 1.4, Delta = lambda/2, 2 bit/s/Hz,
    // -90 dBm noise, 20 dBm budget, 6 m x 10 m strips, d = 3 m.
    static SystemConfig table_defaults(int num_users = 2, int pas_per_waveguide = 4,
                                       int num_slots = 20);

    double noise(int k) const { return noise_power.at(static_cast<std::size_t>(k)); }
    double required_rate(int k) const { return min_rate.at(static_cast<std::size_t>(k)); }

    // Resizes per-user vectors to num_users by repeating their first entry.
    void broadcast_per_user();

    // Throws InvalidConfig on any invariant violation.
    void validate() const;
};

struct Wavelengths {
    double free_space = 0.0; // lambda
    double guided = 0.0;     // lambda_g = lambda / n_eff
    double eta = 0.0;        // lambda / (4 pi), gain at 1 m
};

Wavelengths derive_wavelengths(const SystemConfig& config);

struct Deployment {
    std::vector<Point3> users;
    std::vector<double> waveguide_y;
    double height = 0.0;

    int num_users() const { return static_cast<int>(users.size()); }
    Point3 feed_point(int k) const { return {0.0, waveguide_y.at(static_cast<std::size_t>(k)), height}; }
};

// Lateral offset of waveguide k: (k - (K-1)/2) * W, each waveguide centred on its strip.
double waveguide_offset(int k, const SystemConfig& config);

// Strip [y_lo, y_hi] served by waveguide k.
std::pair<double, double> service_strip(int k, const SystemConfig& config);

Deployment make_deployment(const SystemConfig& config, std::vector<Point3> users);

enum class LayoutMode { continuous, discrete };

struct PinchingLayout {
    Matrix positions; // K x N
    LayoutMode mode = LayoutMode::continuous;

    int num_waveguides() const { return static_cast<int>(positions.rows()); }
    int num_pas() const { return static_cast<int>(positions.cols()); }
    void sort_rows();
};

// Feasible set F^C: 0 <= x <= L and consecutive gaps >= Delta - tol.
bool is_feasible_continuous(const PinchingLayout& layout, const SystemConfig& config,
                            double tol = 1e-9);

// Feasible set F^D: every entry on the slot grid and distinct within a row.
bool is_feasible_discrete(const PinchingLayout& layout, const SystemConfig& config,
                          double tol = 1e-9);

double slot_spacing(const SystemConfig& config);
double slot_position(int slot, const SystemConfig& config);

double user_pa_distance(const Point3& user, const Point3& pa);

// Free-space channel from the PAs of waveguide `waveguide` to user `user`.
ComplexVector free_space_channel(int user, int waveguide, const PinchingLayout& layout,
                                 const Deployment& deployment, const SystemConfig& config);

// In-waveguide propagation from the feed point to each PA of `waveguide` (lossless).
ComplexVector waveguide_channel(int waveguide, const PinchingLayout& layout,
                                const SystemConfig& config);

// alpha(k', k): combined gain of waveguide k' observed at user k.
struct EffectiveGains {
    ComplexMatrix alpha;

    // upsilon(k', k) = |alpha(k', k)|^2
    Matrix power_gains() const { return alpha.cwiseAbs2(); }
};

EffectiveGains effective_gains(const PinchingLayout& layout, const Deployment& deployment,
                               const SystemConfig& config);

// Rate of user k given squared gains upsilon (K x K, column k = received at user k)
// and an effective noise floor.
double rate_from_gains(int k, const Matrix& upsilon, const Vector& powers, double noise_floor);

double user_rate(int k, const PinchingLayout& layout, const Vector& powers,
                 const Deployment& deployment, const SystemConfig& config);
double user_rate(int k, const EffectiveGains& gains, const Vector& powers,
                 const SystemConfig& config);

Vector user_rates(const EffectiveGains& gains, const Vector& powers, const SystemConfig& config);
Vector user_rates(const PinchingLayout& layout, const Vector& powers,
                  const Deployment& deployment, const SystemConfig& config);

double sum_rate(const PinchingLayout& layout, const Vector& powers,
                const Deployment& deployment, const SystemConfig& config);

// Upper bound on the sum rate from |alpha| <= N eta / d.
double sum_rate_cap(const SystemConfig& config);

bool powers_feasible(const Vector& powers, const SystemConfig& config, double tol = 1e-9);
Vector equal_power_split(const SystemConfig& config);

struct GridSpec {
    double x_min = 0.0;
    double x_max = 0.0;
    int nx = 0;
    double y_min = 0.0;
    double y_max = 0.0;
    int ny = 0;

    // Grid over the whole service area [0, L] x [y_lo(0), y_hi(K-1)].
    static GridSpec service_area(const SystemConfig& config, int nx, int ny);
    double x(int i) const;
    double y(int j) const;
};

// |alpha|^2 from waveguide k at an arbitrary ground point.
double probe_gain(int waveguide, const PinchingLayout& layout, const Point3& point,
                  const Deployment& deployment, const SystemConfig& config);

// ny x nx matrix of probe gains in dB relative to the grid maximum (max -> 0 dB).
Matrix channel_gain_map(int waveguide, const PinchingLayout& layout, const GridSpec& grid,
                        const Deployment& deployment, const SystemConfig& config);

} // namespace wdma
