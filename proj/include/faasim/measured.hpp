#pragma once

// Hardware measurements that are reported but not simulated.

namespace faasim::measured {

inline constexpr double kUvmBootSeconds = 2.47;         // mean, single microVM incl. jailer setup
inline constexpr double kUvmSingleBootJoules = 335.81;  // one microVM booted on an otherwise idle server
inline constexpr double kSocBootSeconds = 3.16;         // mean, relay on to network callback
inline constexpr double kSocKernelBootSeconds = 0.077;

inline constexpr double kServerIdleWatts = 120.0;
inline constexpr double kServerMaxWatts = 330.0;
inline constexpr double kSocIdleWatts = 0.6;
inline constexpr double kSocMaxWatts = 3.6;

inline constexpr double kServerLinpackGflopsPerWatt = 2.58;
inline constexpr double kSocLinpackGflopsPerWatt = 0.45;

/// Request rate used for the provider-scale extrapolation.
inline constexpr double kProviderScaleRps = 4'000'000.0;

}  // namespace faasim::measured
