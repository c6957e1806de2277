#pragma once

// Generalized parameter-shift differentiation. A band-limited expectation
//   f(x) = a_0 + sum_j [a_j cos(D_j x) + b_j sin(D_j x)]
// satisfies f(x+s_k) - f(x-s_k) = sum_j 2 sin(D_j s_k) c_j with
// f'(x) = sum_j D_j c_j; solving the linear system against the spectral
// gaps D_j gives an analytic derivative from 2|shifts| evaluations.
// The approximate variant runs the same computation with a reduced set of
// effective gaps standing in for the true spectrum.

#include "quantum_core.hpp"
#include "sampling.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace rydqel {

struct GapSet {
	std::vector<double> gaps; // distinct positive, strictly increasing

	static GapSet of(std::vector<double> g)
	{
		std::sort(g.begin(), g.end());
		for (std::size_t i = 0; i < g.size(); ++i) {
			if (g[i] <= 0)
				throw std::invalid_argument("GapSet: gaps must be positive");
			if (i > 0 && g[i] - g[i - 1] < 1e-9)
				throw std::invalid_argument("GapSet: duplicate gap");
		}
		return GapSet{std::move(g)};
	}
};

struct ShiftSet {
	std::vector<double> shifts;

	static ShiftSet of(std::vector<double> s)
	{
		for (double v : s)
			if (v <= 0)
				throw std::invalid_argument("ShiftSet: shifts must be positive");
		return ShiftSet{std::move(s)};
	}
};

struct ShiftedEvaluation {
	double x = 0;
	MagnetizationEstimate estimate;
};

struct DerivativeEstimate {
	double value = 0;
	double std_error = 0;
	double condition_number = 0;
	std::vector<ShiftedEvaluation> evaluations; // plus then minus, shift order
};

// All distinct positive (lambda_a - lambda_b)/2 of a Hermitian generator,
// merged within tolerance. These are the frequencies of f(x) under the
// exp(-i (x/2) G) encoding.
inline GapSet spectral_gaps_of_generator(const Matrix& g, double tol = 1e-6)
{
	Eigen::SelfAdjointEigenSolver<Matrix> es(g);
	std::vector<double> raw;
	for (Eigen::Index a = 0; a < g.rows(); ++a)
		for (Eigen::Index b = 0; b < a; ++b)
			raw.push_back(0.5 * std::abs(es.eigenvalues()(a) - es.eigenvalues()(b)));
	std::sort(raw.begin(), raw.end());
	std::vector<double> out;
	for (double v : raw) {
		if (v <= tol)
			continue;
		if (out.empty() || v - out.back() > tol)
			out.push_back(v);
	}
	return GapSet{std::move(out)};
}

struct WeightedGap {
	double gap = 0;
	double weight = 0;
};

// Spectral gaps weighted by the transition amplitude from the reference
// state: weight_ab = |<a|ref>| |<b|ref>|. Used to pick dominant effective
// gaps for aGPSR when the true spectrum is larger than the shift budget.
inline std::vector<WeightedGap> weighted_gaps_from_reference(const Matrix& g,
                                                             const Vector& reference,
                                                             double tol = 1e-6)
{
	Eigen::SelfAdjointEigenSolver<Matrix> es(g);
	const Vector overlap = es.eigenvectors().adjoint() * reference;
	std::vector<WeightedGap> raw;
	for (Eigen::Index a = 0; a < g.rows(); ++a)
		for (Eigen::Index b = 0; b < a; ++b) {
			const double gap = 0.5 * std::abs(es.eigenvalues()(a) - es.eigenvalues()(b));
			if (gap <= tol)
				continue;
			raw.push_back({gap, std::abs(overlap(a)) * std::abs(overlap(b))});
		}
	std::sort(raw.begin(), raw.end(), [](auto& u, auto& v) { return u.gap < v.gap; });
	// merge coincident gaps, summing weight
	std::vector<WeightedGap> out;
	for (const auto& w : raw) {
		if (!out.empty() && w.gap - out.back().gap <= tol) {
			out.back().gap = (out.back().gap * out.back().weight + w.gap * w.weight) /
			                 std::max(out.back().weight + w.weight, 1e-300);
			out.back().weight += w.weight;
		} else {
			out.push_back(w);
		}
	}
	return out;
}

// Dominant effective gaps: cluster the weighted gap list (gaps closer than
// cluster_width fall together), take the weight-averaged gap per cluster and
// keep the `count` heaviest clusters. A documented stand-in for the gap
// selection of the aGPSR reference.
inline GapSet dominant_effective_gaps(const std::vector<WeightedGap>& gaps, std::size_t count,
                                      double cluster_width = 0.5, double weight_floor = 1e-6)
{
	std::vector<std::vector<WeightedGap>> clusters;
	for (const auto& g : gaps) {
		if (g.weight < weight_floor)
			continue;
		if (!clusters.empty() && g.gap - clusters.back().back().gap < cluster_width)
			clusters.back().push_back(g);
		else
			clusters.push_back({g});
	}
	std::vector<WeightedGap> merged;
	for (const auto& c : clusters) {
		double tw = 0, tg = 0;
		for (const auto& g : c) {
			tw += g.weight;
			tg += g.gap * g.weight;
		}
		merged.push_back({tg / tw, tw});
	}
	std::sort(merged.begin(), merged.end(), [](auto& a, auto& b) { return a.weight > b.weight; });
	if (merged.size() < count)
		throw std::runtime_error("dominant_effective_gaps: fewer clusters than requested gaps");
	std::vector<double> out;
	for (std::size_t i = 0; i < count; ++i)
		out.push_back(merged[i].gap);
	return GapSet::of(std::move(out));
}

using Evaluator = std::function<MagnetizationEstimate(double)>;

// Linear-combination step shared by the live evaluator path and the
// stored-evaluation path (the extremization stage reuses measurements from
// classical memory without re-running circuits).
inline DerivativeEstimate gpsr_combine(double x, const GapSet& gaps, const ShiftSet& shifts,
                                       const std::vector<MagnetizationEstimate>& plus,
                                       const std::vector<MagnetizationEstimate>& minus,
                                       double condition_cap = 1e8)
{
	const std::size_t m = gaps.gaps.size();
	if (m == 0 || shifts.shifts.size() != m)
		throw std::invalid_argument("gpsr: |gaps| must equal |shifts|");
	if (plus.size() != m || minus.size() != m)
		throw std::invalid_argument("gpsr: need one +/- evaluation pair per shift");

	Eigen::MatrixXd sys(m, m); // sys(k, j) = 2 sin(D_j s_k)
	for (std::size_t k = 0; k < m; ++k)
		for (std::size_t j = 0; j < m; ++j)
			sys(k, j) = 2.0 * std::sin(gaps.gaps[j] * shifts.shifts[k]);
	Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys, Eigen::ComputeFullU | Eigen::ComputeFullV);
	const double smin = svd.singularValues()(m - 1);
	const double cond = smin > 0 ? svd.singularValues()(0) / smin
	                             : std::numeric_limits<double>::infinity();
	if (!(cond < condition_cap))
		throw std::runtime_error("gpsr: shift matrix ill-conditioned");

	DerivativeEstimate est;
	est.condition_number = cond;
	Eigen::VectorXd diffs(m);
	for (std::size_t k = 0; k < m; ++k) {
		diffs(k) = plus[k].value - minus[k].value;
		est.evaluations.push_back({x + shifts.shifts[k], plus[k]});
		est.evaluations.push_back({x - shifts.shifts[k], minus[k]});
	}
	const Eigen::VectorXd coeffs = sys.fullPivLu().solve(diffs);
	Eigen::VectorXd gapvec(m);
	for (std::size_t j = 0; j < m; ++j)
		gapvec(j) = gaps.gaps[j];
	est.value = gapvec.dot(coeffs);

	// effective weight of raw evaluation f(x +- s_k) is +-(gap . inv(sys))_k
	const Eigen::MatrixXd inv = sys.inverse();
	double var = 0;
	for (std::size_t k = 0; k < m; ++k) {
		const double w = gapvec.dot(inv.col(k));
		var += w * w * (plus[k].std_error * plus[k].std_error +
		                minus[k].std_error * minus[k].std_error);
	}
	est.std_error = std::sqrt(var);
	return est;
}

inline DerivativeEstimate gpsr_derivative(const Evaluator& f, double x, const GapSet& gaps,
                                          const ShiftSet& shifts, double condition_cap = 1e8)
{
	const std::size_t m = gaps.gaps.size();
	if (m == 0 || shifts.shifts.size() != m)
		throw std::invalid_argument("gpsr_derivative: |gaps| must equal |shifts|");
	std::vector<MagnetizationEstimate> plus(m), minus(m);
	for (std::size_t k = 0; k < m; ++k) {
		plus[k] = f(x + shifts.shifts[k]);
		minus[k] = f(x - shifts.shifts[k]);
	}
	return gpsr_combine(x, gaps, shifts, plus, minus, condition_cap);
}

// Same linear-system computation run with surrogate effective gaps; the
// result is approximate whenever the true spectrum exceeds them.
inline DerivativeEstimate agpsr_derivative(const Evaluator& f, double x,
                                           const GapSet& effective_gaps, const ShiftSet& shifts,
                                           double condition_cap = 1e8)
{
	return gpsr_derivative(f, x, effective_gaps, shifts, condition_cap);
}

} // namespace rydqel
