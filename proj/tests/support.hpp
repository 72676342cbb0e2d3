#pragma once

#include <random>
#include <string>
#include <vector>

#include "toricfloer/novikov.hpp"
#include "toricfloer/toric.hpp"

namespace testsupport {

using namespace toricfloer;

struct Builtin
{
	ToricFano x;
	Fiber balanced; // barycenter
};

inline std::vector<Builtin> builtins()
{
	std::vector<Builtin> out;
	for (std::size_t n = 1; n <= 6; ++n) {
		Fiber f;
		f.u.assign(n, make_rational(1, static_cast<long>(n + 1)));
		out.push_back({projective_space(n), f});
	}
	out.push_back({cp1_x_cp1(), Fiber{{make_rational(1, 2), make_rational(1, 2)}, {}}});
	return out;
}

class Gen
{
public:
	explicit Gen(std::uint64_t seed) : rng_(seed) {}

	long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng_); }
	bool coin() { return integer(0, 1) == 1; }
	double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

	Rational rational(long max_num = 5, long max_den = 4)
	{
		return make_rational(integer(-max_num, max_num), integer(1, max_den));
	}

	/// Up to max_terms terms with small exponents; may collapse to fewer.
	NovikovElement novikov(std::size_t max_terms = 5)
	{
		std::vector<NovikovTerm> terms;
		auto k = static_cast<std::size_t>(integer(0, static_cast<long>(max_terms)));
		for (std::size_t i = 0; i < k; ++i) {
			Rational c = rational();
			if (c == 0)
				c = 1;
			terms.push_back({c, make_rational(integer(0, 6), integer(1, 3)), static_cast<int>(integer(0, 2))});
		}
		return NovikovElement::from_terms(std::move(terms));
	}

	NovikovElement nonzero_novikov(std::size_t max_terms = 5)
	{
		NovikovElement a;
		while (a.is_zero())
			a = novikov(max_terms);
		return a;
	}

	/// Interior point: convex combination of the vertices with weights in [1, max_w].
	Fiber interior_fiber(const ToricFano& x, long max_w = 3)
	{
		const auto& verts = x.vertices();
		RationalVector u(x.dim(), Rational(0));
		long total = 0;
		for (const auto& v : verts) {
			long w = integer(1, max_w);
			total += w;
			for (std::size_t i = 0; i < x.dim(); ++i)
				u[i] += w * v[i];
		}
		for (auto& c : u)
			c /= total;
		return Fiber{u, {}};
	}

	/// Interior point on the grid of step 1/g, by rejection inside the bounding box.
	/// The caller keeps g large enough for interior grid points to exist.
	Fiber grid_fiber(const ToricFano& x, long g)
	{
		auto [lo, hi] = x.bounding_box();
		while (true) {
			RationalVector u;
			for (std::size_t i = 0; i < x.dim(); ++i) {
				long a = static_cast<long>(std::floor(to_double(lo[i]) * g));
				long b = static_cast<long>(std::ceil(to_double(hi[i]) * g));
				u.push_back(make_rational(integer(a, b), g));
			}
			if (x.is_interior(u))
				return Fiber{u, {}};
		}
	}

	std::vector<double> interior_point_double(const ToricFano& x)
	{
		Fiber f = interior_fiber(x, 4);
		std::vector<double> p;
		for (const auto& c : f.u)
			p.push_back(to_double(c));
		return p;
	}

	std::mt19937_64& engine() { return rng_; }

private:
	std::mt19937_64 rng_;
};

inline std::string fiber_string(const Fiber& f)
{
	std::string s = "(";
	for (std::size_t i = 0; i < f.u.size(); ++i)
		s += (i ? "," : "") + to_string(f.u[i]);
	return s + ")";
}

/// Relative error with an absolute floor for values near zero.
inline double rel_err(double got, double want, double floor = 1.0)
{
	return std::abs(got - want) / std::max(std::abs(want), floor);
}

} // namespace testsupport
