#include <rydqel/de_problem.hpp>

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

} // namespace

TEST_CASE("rhs evaluates the scaled polynomial")
{
	auto de = paper_de();
	CHECK(rhs(de, 0.0) == Catch::Approx(63.1));
	CHECK(rhs(de, 8.0) == Catch::Approx(63.1 - 857.7 + 4503.2 - 11823.4 + 16477.2 - 11615.9 + 3253.3));
	// the residual target ignores f for this first-order DE
	CHECK(residual_target(de, 123.0, 4.0) == rhs(de, 4.0));
}

TEST_CASE("analytic solution satisfies the boundary and differentiates to rhs")
{
	auto de = paper_de();
	CHECK(analytic_solution(de, de.boundary_x) == 0.0); // exact by construction

	for (double x : {2.3, 3.6, 5.1, 7.8}) {
		const double h = 1e-6;
		const double fd = (analytic_solution(de, x + h) - analytic_solution(de, x - h)) / (2 * h);
		CHECK(fd == Catch::Approx(rhs(de, x)).margin(1e-5));
	}
}

TEST_CASE("stationary points of the reference rhs")
{
	auto de = paper_de();
	// interior roots located by sign change + bisection
	const std::vector<double> roots = {3.0648, 3.4871, 5.1397, 7.2312};
	for (double r : roots) {
		CHECK(rhs(de, r - 0.01) * rhs(de, r + 0.01) < 0);
	}
}

TEST_CASE("analytic extremum of the reference problem")
{
	auto de = paper_de();
	auto ext = analytic_extremum(de);
	CHECK(ext.x == Catch::Approx(5.1397).margin(1e-3));
	CHECK(ext.value == Catch::Approx(-0.8908).margin(1e-3));
	CHECK(ext.kind == "minimum");
	CHECK_FALSE(ext.at_boundary);
	CHECK(std::abs(rhs(de, ext.x)) < 1e-6);
}

TEST_CASE("monotone rhs pushes the extremum to the boundary")
{
	PolynomialDE de;
	de.coefficients = {1.0}; // f' = 1 everywhere: minimum at the left edge
	de.scale = 1.0;
	de.boundary_x = 0.5;
	de.boundary_value = 0.0;
	de.domain_lo = 0.0;
	de.domain_hi = 1.0;
	auto ext = analytic_extremum(de);
	CHECK(ext.x == 0.0);
	CHECK(ext.at_boundary);
}

TEST_CASE("DE JSON round trip and validation")
{
	auto de = paper_de();
	auto back = de_from_json(de_to_json(de));
	CHECK(back.coefficients == de.coefficients);
	CHECK(back.boundary_x == de.boundary_x);
	CHECK(back.domain_lo == 2.0);
	CHECK(back.domain_hi == 8.0);

	nlohmann::json bad = de_to_json(de);
	bad["scale"] = 0.0;
	CHECK_THROWS_AS(de_from_json(bad), std::invalid_argument);
	bad = de_to_json(de);
	bad["boundary_x"] = 9.0;
	CHECK_THROWS_AS(de_from_json(bad), std::invalid_argument);
}
