#pragma once

// Analog neutral-atom Hamiltonian:
//   (Omega/2)(cos(phi) sum sigma_x - sin(phi) sum sigma_y)
//   - (delta/2) sum sigma_z + sum_{i<j} (C6 / r_ij^6) N_i N_j
// Angular frequencies in rad/us, times in us, distances in um, hbar = 1.

#include "quantum_core.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace rydqel {

struct Atom {
	double x = 0;
	double y = 0;
	int group = 0;
};

struct RegisterGeometry {
	std::vector<Atom> atoms;
	double c6 = 2.0 * kPi * 1.38e5; // rad um^6 / us (2pi x 138 GHz um^6)

	int n_atoms() const { return static_cast<int>(atoms.size()); }

	double distance(int i, int j) const
	{
		const double dx = atoms[i].x - atoms[j].x;
		const double dy = atoms[i].y - atoms[j].y;
		return std::sqrt(dx * dx + dy * dy);
	}

	// The default experiment layout: one pair at spacing r per multiplex copy,
	// copies offset by `copy_distance` along y.
	static RegisterGeometry pair(double r = 8.7, int copies = 1, double copy_distance = 50.0)
	{
		RegisterGeometry g;
		for (int c = 0; c < copies; ++c) {
			g.atoms.push_back({0.0, c * copy_distance, c});
			g.atoms.push_back({r, c * copy_distance, c});
		}
		return g;
	}

	// Atoms belonging to one multiplex group, as a standalone geometry.
	RegisterGeometry group_geometry(int group) const
	{
		RegisterGeometry g;
		g.c6 = c6;
		for (const auto& a : atoms)
			if (a.group == group)
				g.atoms.push_back(a);
		return g;
	}

	std::vector<int> group_ids() const
	{
		std::map<int, int> seen;
		for (const auto& a : atoms)
			seen[a.group]++;
		std::vector<int> ids;
		for (const auto& [id, cnt] : seen)
			ids.push_back(id);
		return ids;
	}
};

struct DriveSample {
	double omega = 0; // rad/us, >= 0
	double delta = 0; // rad/us
	double phi = 0;   // rad
};

inline double interaction_strength(double r, double c6)
{
	if (r <= 0)
		throw std::invalid_argument("interaction_strength: distance must be positive");
	return c6 / std::pow(r, 6);
}

inline Matrix build_hamiltonian(const DriveSample& drive, const RegisterGeometry& geometry)
{
	const int n = geometry.n_atoms();
	if (n < 1)
		throw std::invalid_argument("build_hamiltonian: empty register");
	const std::size_t d = std::size_t{1} << n;
	Matrix h = Matrix::Zero(d, d);
	const double cx = 0.5 * drive.omega * std::cos(drive.phi);
	const double cy = -0.5 * drive.omega * std::sin(drive.phi);
	for (int q = 0; q < n; ++q) {
		h += cx * embed_single_qubit(sigma_x(), q, n);
		h += cy * embed_single_qubit(sigma_y(), q, n);
		h += -0.5 * drive.delta * embed_single_qubit(sigma_z(), q, n);
	}
	for (int i = 0; i < n; ++i)
		for (int j = i + 1; j < n; ++j) {
			const double r = geometry.distance(i, j);
			if (r <= 0)
				throw std::invalid_argument("build_hamiltonian: coincident atom positions");
			h += interaction_strength(r, geometry.c6) *
			     (embed_single_qubit(number_op(), i, n) * embed_single_qubit(number_op(), j, n));
		}
	return h;
}

struct CrosstalkReport {
	double ratio = 0; // (C6/D^6) / Omega between the closest copy centers
	double copy_distance = 0;
	bool ok = false;
};

// Advisory check that multiplexed copies are far enough apart:
// D >> (C6/Omega)^(1/6) i.e. (C6/D^6)/Omega below threshold.
inline CrosstalkReport multiplex_crosstalk_check(const RegisterGeometry& geometry, double omega,
                                                 double threshold = 1e-3)
{
	auto ids = geometry.group_ids();
	if (ids.size() < 2)
		throw std::invalid_argument("multiplex_crosstalk_check: fewer than two groups");
	// center of each group
	std::vector<std::pair<double, double>> centers;
	for (int id : ids) {
		double sx = 0, sy = 0;
		int cnt = 0;
		for (const auto& a : geometry.atoms)
			if (a.group == id) {
				sx += a.x;
				sy += a.y;
				++cnt;
			}
		centers.emplace_back(sx / cnt, sy / cnt);
	}
	double dmin = std::numeric_limits<double>::infinity();
	for (std::size_t i = 0; i < centers.size(); ++i)
		for (std::size_t j = i + 1; j < centers.size(); ++j) {
			const double dx = centers[i].first - centers[j].first;
			const double dy = centers[i].second - centers[j].second;
			dmin = std::min(dmin, std::sqrt(dx * dx + dy * dy));
		}
	CrosstalkReport rep;
	rep.copy_distance = dmin;
	rep.ratio = interaction_strength(dmin, geometry.c6) / omega;
	rep.ok = rep.ratio < threshold;
	return rep;
}

inline RegisterGeometry geometry_from_json(const nlohmann::json& j)
{
	RegisterGeometry g;
	if (j.contains("c6"))
		g.c6 = j.at("c6").get<double>();
	for (const auto& a : j.at("atoms"))
		g.atoms.push_back({a.at("x").get<double>(), a.at("y").get<double>(),
		                   a.value("group", 0)});
	if (g.c6 <= 0)
		throw std::invalid_argument("geometry: c6 must be positive");
	return g;
}

inline nlohmann::json geometry_to_json(const RegisterGeometry& g)
{
	nlohmann::json atoms = nlohmann::json::array();
	for (const auto& a : g.atoms)
		atoms.push_back({{"x", a.x}, {"y", a.y}, {"group", a.group}});
	return {{"c6", g.c6}, {"atoms", atoms}};
}

} // namespace rydqel
