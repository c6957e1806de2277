#pragma once

// The benchmark first-order ODE: a degree-6 polynomial right-hand side in
// x/scale with a single boundary value, plus its exact antiderivative and
// extremum as analytic oracles. The general residual interface g(f, x)
// accepts the function value even though this instance ignores it.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace rydqel {

struct PolynomialDE {
	std::vector<double> coefficients; // alpha_i on (x/scale)^i
	double scale = 8.0;
	double boundary_x = 0;
	double boundary_value = 0;
	double domain_lo = 0;
	double domain_hi = 0;
};

inline double rhs(const PolynomialDE& de, double x)
{
	const double u = x / de.scale;
	double acc = 0, p = 1;
	for (double a : de.coefficients) {
		acc += a * p;
		p *= u;
	}
	return acc;
}

// g(f, x) for the DQC residual; this DE's right-hand side ignores f.
inline double residual_target(const PolynomialDE& de, double /*f*/, double x)
{
	return rhs(de, x);
}

// Term-wise antiderivative with the constant fixed by the boundary value.
inline double analytic_solution(const PolynomialDE& de, double x)
{
	auto primitive = [&](double xx) {
		const double u = xx / de.scale;
		double acc = 0, p = u;
		for (std::size_t i = 0; i < de.coefficients.size(); ++i) {
			acc += de.coefficients[i] * de.scale * p / static_cast<double>(i + 1);
			p *= u;
		}
		return acc;
	};
	return primitive(x) - primitive(de.boundary_x) + de.boundary_value;
}

struct Extremum {
	double x = 0;
	double value = 0;
	std::string kind;       // "minimum" here; oracle returns the global minimizer
	bool at_boundary = false;
};

// Global minimizer of the analytic solution over interior stationary points
// (roots of rhs, bracketed on a dense grid and bisected) and the endpoints.
inline Extremum analytic_extremum(const PolynomialDE& de, int grid = 4096, double tol = 1e-10)
{
	std::vector<double> candidates = {de.domain_lo, de.domain_hi};
	std::vector<double> roots;
	double prev_x = de.domain_lo;
	double prev_v = rhs(de, prev_x);
	for (int i = 1; i <= grid; ++i) {
		const double x = de.domain_lo + (de.domain_hi - de.domain_lo) * i / grid;
		const double v = rhs(de, x);
		if (prev_v == 0)
			roots.push_back(prev_x);
		else if (prev_v * v < 0) {
			double a = prev_x, b = x, fa = prev_v;
			while (b - a > tol) {
				const double m = 0.5 * (a + b);
				const double fm = rhs(de, m);
				if (fa * fm <= 0)
					b = m;
				else {
					a = m;
					fa = fm;
				}
			}
			roots.push_back(0.5 * (a + b));
		}
		prev_x = x;
		prev_v = v;
	}
	candidates.insert(candidates.end(), roots.begin(), roots.end());
	Extremum best;
	bool first = true;
	for (double c : candidates) {
		const double v = analytic_solution(de, c);
		if (first || v < best.value) {
			best.x = c;
			best.value = v;
			best.at_boundary = (c == de.domain_lo || c == de.domain_hi);
			first = false;
		}
	}
	best.kind = "minimum";
	return best;
}

struct CollocationSet {
	std::vector<double> points;
	std::vector<double> extra_qel_points;
};

inline PolynomialDE de_from_json(const nlohmann::json& j)
{
	PolynomialDE de;
	de.coefficients = j.at("coefficients").get<std::vector<double>>();
	de.scale = j.value("scale", 8.0);
	de.boundary_x = j.at("boundary_x").get<double>();
	de.boundary_value = j.at("boundary_value").get<double>();
	de.domain_lo = j.at("domain").at(0).get<double>();
	de.domain_hi = j.at("domain").at(1).get<double>();
	if (de.scale <= 0)
		throw std::invalid_argument("de: scale must be positive");
	if (de.boundary_x < de.domain_lo || de.boundary_x > de.domain_hi)
		throw std::invalid_argument("de: boundary point outside the domain");
	return de;
}

inline nlohmann::json de_to_json(const PolynomialDE& de)
{
	return {{"coefficients", de.coefficients},
	        {"scale", de.scale},
	        {"boundary_x", de.boundary_x},
	        {"boundary_value", de.boundary_value},
	        {"domain", {de.domain_lo, de.domain_hi}}};
}

} // namespace rydqel
