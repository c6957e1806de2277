#pragma once

// Whittaker-Eilers smoother: minimize sum w_i (z_i - y_i)^2 + lambda |D^d z|^2
// by solving (W + lambda D^T D) z = W y with D the order-d difference matrix.
// Smoothing differences are index-based; the derivative uses the physical
// x grid (central differences, one-sided at the ends).

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace rydqel {

struct SmootherConfig {
	double lambda = 10.0;
	int order = 2; // difference order d in {1, 2, 3}
	std::vector<double> weights; // empty = all ones
};

inline std::vector<double> whittaker_smooth(const std::vector<double>& y,
                                            const SmootherConfig& config)
{
	const int n = static_cast<int>(y.size());
	if (config.order < 1 || config.order > 3)
		throw std::invalid_argument("whittaker_smooth: order must be 1, 2 or 3");
	if (n <= config.order)
		throw std::invalid_argument("whittaker_smooth: need more points than the order");
	if (config.lambda < 0)
		throw std::invalid_argument("whittaker_smooth: lambda must be non-negative");
	if (!config.weights.empty() && static_cast<int>(config.weights.size()) != n)
		throw std::invalid_argument("whittaker_smooth: weight length mismatch");

	Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
	if (!config.weights.empty())
		for (int i = 0; i < n; ++i) {
			if (config.weights[i] < 0)
				throw std::invalid_argument("whittaker_smooth: negative weight");
			w(i) = config.weights[i];
		}
	if (w.maxCoeff() <= 0)
		throw std::invalid_argument("whittaker_smooth: all weights are zero");

	Eigen::MatrixXd diff = Eigen::MatrixXd::Identity(n, n);
	for (int d = 0; d < config.order; ++d) {
		Eigen::MatrixXd next(diff.rows() - 1, n);
		for (Eigen::Index r = 0; r + 1 < diff.rows(); ++r)
			next.row(r) = diff.row(r + 1) - diff.row(r);
		diff = next;
	}
	Eigen::MatrixXd a = config.lambda * (diff.transpose() * diff);
	a.diagonal() += w;

	Eigen::VectorXd yv(n);
	for (int i = 0; i < n; ++i)
		yv(i) = y[i];
	const Eigen::VectorXd z = a.ldlt().solve(w.asDiagonal() * yv);
	return std::vector<double>(z.data(), z.data() + n);
}

inline std::vector<double> smoothed_derivative(const std::vector<double>& x_grid,
                                               const std::vector<double>& y,
                                               const SmootherConfig& config)
{
	const int n = static_cast<int>(y.size());
	if (static_cast<int>(x_grid.size()) != n)
		throw std::invalid_argument("smoothed_derivative: grid length mismatch");
	if (n < 3)
		throw std::invalid_argument("smoothed_derivative: need at least 3 points");
	for (int i = 1; i < n; ++i)
		if (x_grid[i] <= x_grid[i - 1])
			throw std::invalid_argument("smoothed_derivative: grid must be strictly increasing");

	const std::vector<double> z = whittaker_smooth(y, config);
	std::vector<double> d(n);
	d[0] = (z[1] - z[0]) / (x_grid[1] - x_grid[0]);
	for (int i = 1; i + 1 < n; ++i)
		d[i] = (z[i + 1] - z[i - 1]) / (x_grid[i + 1] - x_grid[i - 1]);
	d[n - 1] = (z[n - 1] - z[n - 2]) / (x_grid[n - 1] - x_grid[n - 2]);
	return d;
}

} // namespace rydqel
