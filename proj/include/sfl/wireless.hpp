#pragma once

#include "sfl/profiler.hpp"
#include "sfl/rng.hpp"

#include <cstdint>
#include <limits>

namespace sfl {

// Compute and radio parameters of one device. Compute latency for a load of
// c MACs is a*c plus an exponential tail with mean c/eps.
struct DeviceProfile {
    double a = 1e-9;        // seconds per MAC (latency floor slope)
    double eps = 2e9;       // MACs per second (fluctuation rate); +inf = deterministic
    double p_dbm = 10.0;    // transmit power
    double d_m = 100.0;     // device-server distance
};

enum class NoiseModel {
    total_power,  // noise_dbm is the noise power over the whole band
    psd,          // noise_dbm is a density in dBm/Hz, integrated over W
};

struct SystemParams {
    double bandwidth_hz = 20e6;
    double noise_dbm = -114.0;
    NoiseModel noise_model = NoiseModel::total_power;
    std::size_t num_devices = 20;
    std::uint64_t seed = 1;
    // Adds a downlink gradient transfer of the same size at the same rate.
    bool include_downlink = false;
};

struct ChannelRealization {
    double gain_sq = 0.0;      // linear |g|^2
    double noise_dbm = 0.0;    // effective noise power
    double snr_linear = 0.0;
};

inline constexpr double kInfiniteLatency = std::numeric_limits<double>::infinity();

double path_loss_db(double distance_m);
double noise_power_watts(const SystemParams& sys);

// |g|^2 = rho * X with X ~ Exp(1).
ChannelRealization sample_channel(const DeviceProfile& dev, const SystemParams& sys, Rng& rng);
// Large-scale fading only (X fixed at its mean 1).
ChannelRealization mean_channel(const DeviceProfile& dev, const SystemParams& sys);
ChannelRealization channel_from_gain(double gain_sq, const DeviceProfile& dev, const SystemParams& sys);

// W * log2(1 + snr): the rate a device would get with the whole band.
double unit_rate(const ChannelRealization& ch, const SystemParams& sys);
double transmission_rate(double bandwidth_ratio, const ChannelRealization& ch, const SystemParams& sys);

// D / rate. A zero rate yields kInfiniteLatency, which orders above every
// finite latency; zero data always costs zero time.
double comm_latency(double data_bits, double rate);

double sample_compute_latency(const DeviceProfile& dev, double macs, Rng& rng);
double expected_compute_latency(const DeviceProfile& dev, double macs);
// P[latency < theta] for the shifted exponential model.
double compute_latency_cdf(const DeviceProfile& dev, double macs, double theta);

void validate(const DeviceProfile& dev);
void validate(const SystemParams& sys);

}  // namespace sfl
