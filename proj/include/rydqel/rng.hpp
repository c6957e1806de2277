#pragma once

// Deterministic seed derivation so plan entries can be executed in any
// order (or concurrently) with reproducible results.

#include <cstdint>
#include <cstring>
#include <random>

namespace rydqel {

inline std::uint64_t splitmix64(std::uint64_t x)
{
	x += 0x9e3779b97f4a7c15ULL;
	x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
	x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
	return x ^ (x >> 31);
}

inline std::uint64_t hash_double(double v)
{
	std::uint64_t bits;
	std::memcpy(&bits, &v, sizeof(bits));
	return splitmix64(bits);
}

// seed = hash(master_seed, x, theta, stream) per the execution contract.
inline std::uint64_t derive_seed(std::uint64_t master, double x, double theta,
                                 std::uint64_t stream = 0)
{
	std::uint64_t s = splitmix64(master);
	s = splitmix64(s ^ hash_double(x));
	s = splitmix64(s ^ hash_double(theta));
	s = splitmix64(s ^ stream);
	return s;
}

inline std::mt19937_64 make_rng(std::uint64_t seed)
{
	return std::mt19937_64(splitmix64(seed));
}

} // namespace rydqel
