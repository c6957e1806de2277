#pragma once

// Born-rule bitstring sampling, preparation-failure shot dropping,
// multiplex aggregation and magnetization estimation.

#include "quantum_core.hpp"
#include "rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace rydqel {

struct MagnetizationEstimate {
	double value = 0;
	double std_error = 0;
	long shots = 0; // 0 in exact (infinite-shot) mode
	bool exact = false;
};

// Bitstring convention: qubit 0 is the leftmost character.
struct ShotRecord {
	std::map<std::string, long> counts;
	long requested_shots = 0;
	long valid_shots = 0;
};

inline std::string index_to_bitstring(std::size_t index, int n)
{
	std::string s(n, '0');
	for (int q = 0; q < n; ++q)
		if (index & (std::size_t{1} << (n - 1 - q)))
			s[q] = '1';
	return s;
}

inline ShotRecord sample(const StateVector& state, long shots, std::uint64_t seed)
{
	if (shots < 1)
		throw std::invalid_argument("sample: shots must be >= 1");
	if (std::abs(state.norm() - 1.0) > 1e-8)
		throw std::invalid_argument("sample: state is not normalized");
	std::vector<double> cdf(state.dim());
	double acc = 0;
	for (std::size_t i = 0; i < state.dim(); ++i) {
		acc += std::norm(state.amplitudes(i));
		cdf[i] = acc;
	}
	auto rng = make_rng(seed);
	std::uniform_real_distribution<double> u(0.0, acc);
	std::vector<long> hits(state.dim(), 0);
	for (long s = 0; s < shots; ++s) {
		const double r = u(rng);
		const auto it = std::lower_bound(cdf.begin(), cdf.end(), r);
		hits[static_cast<std::size_t>(it - cdf.begin())]++;
	}
	ShotRecord rec;
	rec.requested_shots = shots;
	rec.valid_shots = shots;
	for (std::size_t i = 0; i < hits.size(); ++i)
		if (hits[i] > 0)
			rec.counts[index_to_bitstring(i, state.n_qubits)] = hits[i];
	return rec;
}

// Each shot is independently dropped with probability failure_rate.
inline ShotRecord apply_prep_failure(const ShotRecord& record, double failure_rate,
                                     std::uint64_t seed)
{
	if (failure_rate < 0 || failure_rate >= 1)
		throw std::invalid_argument("apply_prep_failure: rate must be in [0, 1)");
	if (failure_rate == 0)
		return record;
	auto rng = make_rng(seed);
	std::bernoulli_distribution drop(failure_rate);
	ShotRecord out;
	out.requested_shots = record.requested_shots;
	for (const auto& [bits, cnt] : record.counts) {
		long kept = 0;
		for (long s = 0; s < cnt; ++s)
			if (!drop(rng))
				++kept;
		if (kept > 0)
			out.counts[bits] = kept;
		out.valid_shots += kept;
	}
	return out;
}

inline ShotRecord aggregate_multiplex(const std::vector<ShotRecord>& records)
{
	ShotRecord out;
	std::size_t len = 0;
	for (const auto& r : records) {
		for (const auto& [bits, cnt] : r.counts) {
			if (len == 0)
				len = bits.size();
			else if (bits.size() != len)
				throw std::invalid_argument("aggregate_multiplex: mismatched bitstring lengths");
			out.counts[bits] += cnt;
		}
		out.requested_shots += r.requested_shots;
		out.valid_shots += r.valid_shots;
	}
	return out;
}

// Per-shot observable sum_i z_i with z = +1 Rydberg ('1'), -1 ground ('0').
inline MagnetizationEstimate magnetization_estimate(const ShotRecord& record)
{
	if (record.valid_shots < 1)
		throw std::invalid_argument("magnetization_estimate: no valid shots");
	double sum = 0, sumsq = 0;
	for (const auto& [bits, cnt] : record.counts) {
		double z = 0;
		for (char c : bits)
			z += (c == '1') ? 1.0 : -1.0;
		sum += cnt * z;
		sumsq += cnt * z * z;
	}
	const double n = static_cast<double>(record.valid_shots);
	MagnetizationEstimate est;
	est.shots = record.valid_shots;
	est.value = sum / n;
	if (record.valid_shots >= 2) {
		const double var = std::max(0.0, (sumsq - n * est.value * est.value) / (n - 1.0));
		est.std_error = std::sqrt(var / n);
	}
	return est;
}

inline nlohmann::json shot_record_to_json(const ShotRecord& r)
{
	return {{"counts", r.counts}, {"requested", r.requested_shots}, {"valid", r.valid_shots}};
}

inline ShotRecord shot_record_from_json(const nlohmann::json& j)
{
	ShotRecord r;
	r.counts = j.at("counts").get<std::map<std::string, long>>();
	r.requested_shots = j.at("requested").get<long>();
	r.valid_shots = j.at("valid").get<long>();
	return r;
}

} // namespace rydqel
