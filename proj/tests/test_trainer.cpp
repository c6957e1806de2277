#include <rydqel/dqc_trainer.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace rydqel;

namespace {

PolynomialDE paper_de()
{
	PolynomialDE de;
	de.coefficients = {63.1, -857.7, 4503.2, -11823.4, 16477.2, -11615.9, 3253.3};
	de.scale = 8.0;
	de.boundary_x = 6.516;
	de.boundary_value = 0.0;
	de.domain_lo = 2.0;
	de.domain_hi = 8.0;
	return de;
}

MagnetizationEstimate est(double v)
{
	MagnetizationEstimate e;
	e.value = v;
	e.exact = true;
	return e;
}

DerivativeEstimate dest(double v)
{
	DerivativeEstimate d;
	d.value = v;
	return d;
}

} // namespace

TEST_CASE("scaling map")
{
	ScalingMap s{-0.5, 0.3};
	CHECK(scale_model_output(2.0, s) == Catch::Approx(-0.7));
	CHECK(s.apply_derivative(2.0) == Catch::Approx(-1.0)); // offset drops out of d/dx
}

TEST_CASE("fit_output_scaling recovers a planted affine map")
{
	auto de = paper_de();
	ScalingMap truth{-0.563549, -0.309926};
	std::vector<double> xs, mags;
	for (double x = 2.1; x <= 7.9; x += 0.05) {
		xs.push_back(x);
		mags.push_back((analytic_solution(de, x) - truth.offset) / truth.multiplier);
	}
	auto fit = fit_output_scaling(xs, mags, de);
	CHECK(fit.multiplier == Catch::Approx(truth.multiplier).margin(1e-10));
	CHECK(fit.offset == Catch::Approx(truth.offset).margin(1e-10));

	CHECK_THROWS_AS(fit_output_scaling({1.0}, {2.0}, de), std::invalid_argument);
	CHECK_THROWS_AS(fit_output_scaling({1.0, 2.0}, {3.0, 3.0}, de), std::runtime_error);
}

TEST_CASE("loss is zero for the exact solution")
{
	auto de = paper_de();
	std::vector<double> coll = {2.614, 3.328, 4.042, 4.757, 5.471, 6.185, 6.900, 7.614};
	std::map<double, MagnetizationEstimate> f;
	std::map<double, DerivativeEstimate> df;
	for (double x : coll) {
		f[x] = est(analytic_solution(de, x));
		df[x] = dest(rhs(de, x));
	}
	f[de.boundary_x] = est(0.0);
	auto rep = evaluate_loss(1.0, f, df, de, coll);
	CHECK(rep.l_d == Catch::Approx(0.0).margin(1e-20));
	CHECK(rep.l_b == Catch::Approx(0.0).margin(1e-20));
	CHECK(rep.total == Catch::Approx(0.0).margin(1e-20));
	CHECK(rep.residuals.size() == coll.size());
}

TEST_CASE("loss decomposes into residual and boundary terms")
{
	auto de = paper_de();
	std::vector<double> coll = {3.0, 5.0};
	std::map<double, MagnetizationEstimate> f;
	std::map<double, DerivativeEstimate> df;
	f[3.0] = est(0.0);
	f[5.0] = est(0.0);
	f[de.boundary_x] = est(0.25);
	df[3.0] = dest(rhs(de, 3.0) + 0.1); // residual +0.1
	df[5.0] = dest(rhs(de, 5.0) - 0.2); // residual -0.2

	LossWeights w;
	w.boundary_weight = 4.0;
	auto rep = evaluate_loss(2.79, f, df, de, coll, w);
	CHECK(rep.l_d == Catch::Approx(0.01 + 0.04).margin(1e-12));
	CHECK(rep.l_b == Catch::Approx(0.25));
	CHECK(rep.total == Catch::Approx(0.05 + 4.0 * 0.0625).margin(1e-12));
	CHECK(rep.residuals[0] == Catch::Approx(0.1).margin(1e-12));
	CHECK(rep.residuals[1] == Catch::Approx(-0.2).margin(1e-12));
}

TEST_CASE("lookup tolerance bridges deduplicated keys")
{
	auto de = paper_de();
	std::vector<double> coll = {4.042};
	std::map<double, MagnetizationEstimate> f;
	std::map<double, DerivativeEstimate> df;
	df[4.042] = dest(rhs(de, 4.042));
	// boundary value stored under the coincident shifted x (6.5126 vs 6.516)
	f[6.5126] = est(0.0);
	CHECK_NOTHROW(evaluate_loss(1.0, f, df, de, coll));

	std::map<double, MagnetizationEstimate> empty;
	CHECK_THROWS_AS(evaluate_loss(1.0, empty, df, de, coll), std::invalid_argument);
	std::map<double, DerivativeEstimate> no_deriv;
	CHECK_THROWS_AS(evaluate_loss(1.0, f, no_deriv, de, coll), std::invalid_argument);
}

TEST_CASE("grid search over theta")
{
	std::vector<LossReport> reports;
	for (double theta : {6.28, 2.79, 0.70}) {
		LossReport r;
		r.theta = theta;
		r.total = std::abs(theta - 2.79) + 1.0;
		reports.push_back(r);
	}
	auto [best, sorted] = grid_search(reports);
	CHECK(best == 2.79);
	CHECK(sorted.front().theta == 0.70);
	CHECK(sorted.back().theta == 6.28);

	SECTION("ties break toward smaller theta")
	{
		for (auto& r : reports)
			r.total = 1.0;
		CHECK(grid_search(reports).first == 0.70);
	}
	CHECK_THROWS_AS(grid_search({}), std::invalid_argument);
}
