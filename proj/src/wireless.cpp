#include "sfl/wireless.hpp"

#include "sfl/errors.hpp"
#include "sfl/units.hpp"

#include <fmt/format.h>

#include <cmath>

namespace sfl {

double path_loss_db(double distance_m) {
    if (!(distance_m > 0.0)) throw DomainError(fmt::format("path_loss_db: distance must be > 0, got {}", distance_m));
    return 128.1 + 37.6 * std::log10(1e-3 * distance_m);
}

double noise_power_watts(const SystemParams& sys) {
    const double n0 = units::dbm_to_watts(sys.noise_dbm);
    return sys.noise_model == NoiseModel::psd ? n0 * sys.bandwidth_hz : n0;
}

ChannelRealization channel_from_gain(double gain_sq, const DeviceProfile& dev, const SystemParams& sys) {
    const double noise_w = noise_power_watts(sys);
    ChannelRealization ch;
    ch.gain_sq = gain_sq;
    ch.noise_dbm = units::watts_to_dbm(noise_w);
    ch.snr_linear = units::dbm_to_watts(dev.p_dbm) * gain_sq / noise_w;
    return ch;
}

ChannelRealization sample_channel(const DeviceProfile& dev, const SystemParams& sys, Rng& rng) {
    const double rho = units::db_to_linear(-path_loss_db(dev.d_m));
    std::exponential_distribution<double> fading(1.0);
    return channel_from_gain(rho * fading(rng), dev, sys);
}

ChannelRealization mean_channel(const DeviceProfile& dev, const SystemParams& sys) {
    return channel_from_gain(units::db_to_linear(-path_loss_db(dev.d_m)), dev, sys);
}

double unit_rate(const ChannelRealization& ch, const SystemParams& sys) {
    return sys.bandwidth_hz * std::log2(1.0 + ch.snr_linear);
}

double transmission_rate(double bandwidth_ratio, const ChannelRealization& ch, const SystemParams& sys) {
    if (!(bandwidth_ratio > 0.0 && bandwidth_ratio <= 1.0)) {
        throw DomainError(fmt::format("transmission_rate: bandwidth ratio must be in (0, 1], got {}", bandwidth_ratio));
    }
    return bandwidth_ratio * unit_rate(ch, sys);
}

double comm_latency(double data_bits, double rate) {
    if (data_bits == 0.0) return 0.0;
    if (!(rate > 0.0)) return kInfiniteLatency;
    return data_bits / rate;
}

double sample_compute_latency(const DeviceProfile& dev, double macs, Rng& rng) {
    const double floor = dev.a * macs;
    if (macs <= 0.0 || std::isinf(dev.eps)) return floor;
    std::exponential_distribution<double> tail(dev.eps / macs);
    return floor + tail(rng);
}

double expected_compute_latency(const DeviceProfile& dev, double macs) {
    if (macs <= 0.0) return 0.0;
    return macs * (dev.a + 1.0 / dev.eps);
}

double compute_latency_cdf(const DeviceProfile& dev, double macs, double theta) {
    const double floor = dev.a * macs;
    if (theta < floor) return 0.0;
    if (std::isinf(dev.eps) || macs <= 0.0) return 1.0;
    return -std::expm1(-(dev.eps / macs) * (theta - floor));
}

void validate(const DeviceProfile& dev) {
    if (!(dev.a > 0.0)) throw ConfigError(fmt::format("fleet.a: must be > 0, got {}", dev.a));
    if (!(dev.eps > 0.0)) throw ConfigError(fmt::format("fleet.eps: must be > 0, got {}", dev.eps));
    if (!(dev.d_m > 0.0)) throw ConfigError(fmt::format("fleet.distance: must be > 0, got {}", dev.d_m));
}

void validate(const SystemParams& sys) {
    if (!(sys.bandwidth_hz > 0.0)) throw ConfigError("system.bandwidth_hz: must be > 0");
    if (sys.num_devices < 1) throw ConfigError("system.num_devices: must be >= 1");
}

}  // namespace sfl
