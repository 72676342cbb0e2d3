// Standalone acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <sys/wait.h>

#include "support.hpp"
#include "toricfloer/chain_model.hpp"
#include "toricfloer/report.hpp"

using namespace toricfloer;
using testsupport::Gen;

namespace {

constexpr double gradient_tol = 1e-12;
constexpr int max_solver_iters = 50;
constexpr double l_vs_w_tol = 1e-10;
constexpr double finite_difference_tol = 1e-6;
constexpr double finite_difference_step = 1e-5;

// Failures are recorded with the first few messages; counting continues.
class Tally
{
public:
	void check(bool ok, const std::string& what)
	{
		++checks_;
		if (ok)
			return;
		++failures_;
		if (failures_ <= 3)
			first_ += (first_.empty() ? "" : "; ") + what;
	}
	bool passed() const { return failures_ == 0 && checks_ > 0; }
	std::string summary() const
	{
		std::ostringstream os;
		os << checks_ << " checks";
		if (failures_)
			os << ", " << failures_ << " failed (" << first_ << ")";
		return os.str();
	}

private:
	std::size_t checks_ = 0, failures_ = 0;
	std::string first_;
};

NovikovElement Tq(long c, long p, long q)
{
	return NovikovElement::monomial(Rational(c), make_rational(p, q), 1);
}

template <class F>
void for_each_tuple(std::size_t n, std::size_t m, F&& f)
{
	std::vector<std::size_t> idx(m, 0);
	while (true) {
		f(idx);
		std::size_t k = 0;
		while (k < m && ++idx[k] == n)
			idx[k++] = 0;
		if (k == m)
			return;
	}
}

std::vector<double> to_doubles(const RationalVector& u)
{
	std::vector<double> out;
	for (const auto& c : u)
		out.push_back(to_double(c));
	return out;
}

int cli_exit_code(const std::string& args)
{
	std::string cmd = std::string(TORICFLOER_CLI) + " " + args + " >/dev/null 2>&1";
	int status = std::system(cmd.c_str());
	return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string data(const std::string& name)
{
	return std::string(TORICFLOER_DATA) + "/" + name;
}

CliffordElement random_element(Gen& g, std::size_t n, std::size_t max_blades)
{
	CliffordElement x(n);
	auto k = g.integer(1, static_cast<long>(max_blades));
	for (long i = 0; i < k; ++i)
		x.add(static_cast<Subset>(g.integer(0, (1L << n) - 1)), g.novikov(2));
	return x;
}

// ---------------------------------------------------------------------------

Tally equator_of_cp1()
{
	Tally t;
	ToricFano cp1 = projective_space(1);
	Fiber eq{{make_rational(1, 2)}, {}};
	t.check(hf_rank(cp1, eq) == 2, "hf_rank at u = 1/2");
	auto p = ExteriorClass::generator(1, 0);
	CliffordElement sq = m2_product(cp1, eq, p, p);
	t.check(sq == CliffordElement::unit(1, Tq(1, 1, 2)), "m2(p,p) = " + sq.to_string());
	return t;
}

Tally projective_plane()
{
	Tally t;
	ToricFano cp2 = projective_space(2);
	std::vector<double> init{0.1, 0.1};
	CriticalFiber cf = find_critical_fiber(cp2, std::span<const double>(init));
	RationalVector third{make_rational(1, 3), make_rational(1, 3)};
	t.check(cf.exact && cf.exact->u == third, "solver point");
	t.check(cf.gradient_norm < gradient_tol, "gradient norm");
	t.check(cf.iterations <= max_solver_iters, "iterations " + std::to_string(cf.iterations));
	t.check(hf_rank(cp2, Fiber{third, {}}) == 4, "hf_rank at the barycenter");

	Gen g(9002);
	int tested = 0;
	while (tested < 100) {
		Fiber f = g.interior_fiber(cp2, 6);
		if (is_balanced(cp2, f).balanced)
			continue;
		++tested;
		t.check(hf_rank(cp2, f) == 0, "hf_rank at " + testsupport::fiber_string(f));
	}

	auto s = scan(cp2, 12);
	t.check(s["balanced_fibers"].size() == 1, "scan count");
	t.check(s["balanced_fibers"].size() == 1 && s["balanced_fibers"][0]["u"] == nlohmann::json({"1/3", "1/3"}),
	        "scan fiber");
	return t;
}

Tally product_of_lines()
{
	Tally t;
	QuadraticForm q = formal_hessian(cp1_x_cp1(), Fiber{{make_rational(1, 2), make_rational(1, 2)}, {}});
	t.check(q(0, 0) == Tq(2, 1, 2) && q(1, 1) == Tq(2, 1, 2), "diagonal");
	t.check(q(0, 1).is_zero() && q(1, 0).is_zero(), "off-diagonal");
	return t;
}

Tally projective_spaces()
{
	Tally t;
	for (std::size_t n = 1; n <= 6; ++n) {
		const std::string tag = "CP" + std::to_string(n) + ": ";
		ToricFano x = projective_space(n);
		RationalVector bary(n, make_rational(1, static_cast<long>(n + 1)));
		std::vector<double> init(n, 0.1);
		CriticalFiber cf = find_critical_fiber(x, std::span<const double>(init));
		t.check(cf.exact && cf.exact->u == bary, tag + "solver point");
		Fiber f{bary, {}};
		t.check(hf_rank(x, f) == (std::size_t(1) << n), tag + "hf_rank");

		QuadraticForm q = formal_hessian(x, f);
		NovikovElement diag = Tq(2, 1, static_cast<long>(n + 1)), off = Tq(1, 1, static_cast<long>(n + 1));
		for (std::size_t i = 0; i < n; ++i)
			for (std::size_t j = 0; j < n; ++j)
				t.check(q(i, j) == (i == j ? diag : off), tag + "Q entry");

		auto report = analyze(x);
		t.check(report["conventions"]["offdiagonal_flag"] == (n >= 2), tag + "report flag");
		if (n >= 2)
			t.check(report["conventions"]["Q_halved_offdiagonal"][0][1] ==
			            "1/2*" + off.to_string(),
			        tag + "halved variant");
	}
	return t;
}

Tally superpotential_oracle()
{
	Tally t;
	Gen g(9005);
	for (const auto& b : testsupport::builtins()) {
		const std::size_t n = b.x.dim();
		const std::string tag = b.x.name() + ": ";
		for (const Fiber& f : {b.balanced, g.interior_fiber(b.x, 3)}) {
			ComplexVector theta = theta_of(f);
			auto discs = disc_areas(b.x, f);
			for (std::size_t m = 0; m <= 5; ++m)
				for_each_tuple(n, m, [&](const std::vector<std::size_t>& idx) {
					double sign = ((n - 1) * m) % 2 ? -1.0 : 1.0;
					double w = eval_W_derivative(b.x, std::span<const std::complex<double>>(theta), idx).real();
					double l = l_product(b.x, f, idx).numeric();
					// exact cancellations are judged against the sum of absolute terms
					double scale = 0;
					for (const auto& d : discs) {
						double c = 1;
						for (auto i : idx)
							c *= static_cast<double>(d.normal[i]);
						scale += std::abs(c) * std::exp(-to_double(d.area));
					}
					t.check(std::abs(l - sign * w) <= l_vs_w_tol * std::max(std::abs(w), scale), tag + "l vs W");
				});
		}

		const double h = finite_difference_step;
		for (int trial = 0; trial < 20; ++trial) {
			std::vector<double> u = g.interior_point_double(b.x);
			const std::size_t none[1] = {};
			double floor = eval_W_derivative(b.x, u, std::span<const std::size_t>(none, 0));
			for (std::size_t m = 1; m <= 5; ++m)
				for_each_tuple(n, m, [&](const std::vector<std::size_t>& idx) {
					std::span<const std::size_t> head(idx.data(), m - 1);
					std::size_t j = idx.back();
					std::vector<double> up = u, down = u;
					up[j] += h;
					down[j] -= h;
					double fd = (eval_W_derivative(b.x, up, head) - eval_W_derivative(b.x, down, head)) / (2 * h);
					double exact = eval_W_derivative(b.x, u, idx);
					t.check(std::abs(exact - fd) <= finite_difference_tol * std::max(std::abs(exact), floor),
					        tag + "finite difference");
				});
		}
	}
	return t;
}

Tally divisor_equation()
{
	Tally t;
	// drop-one identity plus an independent closed form (-1)^{nm} prod v T^e q
	auto check_disc = [&](std::span<const long> v, const Rational& area, std::size_t n, const std::string& tag) {
		for (std::size_t m = 1; m <= 4; ++m)
			for_each_tuple(n, m, [&](const std::vector<std::size_t>& idx) {
				std::span<const std::size_t> s(idx);
				NovikovElement lhs = l_product_disc(v, area, n, s);
				NovikovElement rhs = Rational(divisor_pairing(v, n, idx.front())) * l_product_disc(v, area, n, s.subspan(1));
				long c = ((n * m) % 2) ? -1 : 1;
				for (auto i : idx)
					c *= v[i];
				t.check(lhs == rhs, tag + "drop-one");
				t.check(lhs == NovikovElement::monomial(Rational(c), area, 1), tag + "closed form");
			});
	};
	Gen g(9006);
	for (const auto& b : testsupport::builtins()) {
		Fiber f = g.interior_fiber(b.x, 3);
		for (const auto& d : disc_areas(b.x, f))
			check_disc(d.normal, d.area, b.x.dim(), b.x.name() + ": ");
	}
	for (int trial = 0; trial < 120; ++trial) {
		std::size_t n = static_cast<std::size_t>(g.integer(1, 4));
		IntVector v(n);
		for (auto& c : v)
			c = g.integer(-3, 3);
		check_disc(v, make_rational(g.integer(1, 9), g.integer(1, 7)), n, "synthetic: ");
	}
	return t;
}

Tally clifford_suite()
{
	Tally t;
	Gen g(9007);
	for (const auto& b : testsupport::builtins()) {
		const std::size_t n = b.x.dim();
		const std::string tag = b.x.name() + ": ";
		QuadraticForm q = formal_hessian(b.x, b.balanced);
		for (int i = 0; i < 500; ++i) {
			auto x = random_element(g, n, 3), y = random_element(g, n, 3), z = random_element(g, n, 3);
			t.check(cl_mul(q, cl_mul(q, x, y), z) == cl_mul(q, x, cl_mul(q, y, z)), tag + "associativity");
		}
		for (int i = 0; i < 100; ++i) {
			auto x = random_element(g, n, 4);
			t.check(cl_mul(q, CliffordElement::unit(n), x) == x && cl_mul(q, x, CliffordElement::unit(n)) == x,
			        tag + "unit");
		}
		for (std::size_t i = 0; i < n; ++i)
			for (std::size_t j = 0; j < n; ++j) {
				auto ci = CliffordElement::generator(n, i), cj = CliffordElement::generator(n, j);
				t.check(cl_mul(q, ci, cj) + cl_mul(q, cj, ci) == CliffordElement::unit(n, q(i, j)), tag + "relation");
			}
	}
	return t;
}

Tally differential_suite()
{
	Tally t;
	Gen g(9008);
	for (const auto& b : testsupport::builtins()) {
		const std::size_t full = std::size_t(1) << b.x.dim();
		std::vector<Fiber> fibers{b.balanced};
		for (int i = 0; i < 50; ++i)
			fibers.push_back(g.interior_fiber(b.x, g.coin() ? 4 : 2));
		for (const auto& f : fibers) {
			const std::string tag = b.x.name() + " at " + testsupport::fiber_string(f) + ": ";
			NovikovMatrix m = m1_operator(b.x, f);
			t.check((m * m).is_zero(), tag + "m1 m1");
			HfRank r = hf_rank_details(b.x, f);
			t.check(r.rank == (is_balanced(b.x, f).balanced ? full : 0u), tag + "dichotomy");
			t.check(novikov_rank(m, r.elimination.cutoff * 2) == r.m1_rank, tag + "cutoff stability");
		}
	}
	return t;
}

Tally chain_map_suite()
{
	Tally t;
	for (const auto& b : testsupport::builtins()) {
		ChainContext ctx = ChainContext::from(b.x, b.balanced);
		for (Subset mask = 0; mask < (Subset(1) << b.x.dim()); ++mask) {
			ChainExpression p = ChainExpression::l_monomial(ctx, mask);
			ChainMapCheck c = check_chain_map(p);
			const std::string tag = b.x.name() + " P = " + p.to_string() + ": ";
			t.check(c.chain_identity, tag + "chain identity");
			t.check(c.filtration, tag + "filtration");
			t.check(verify_chain_map(p), tag + "verify");
		}
	}
	return t;
}

Tally robustness()
{
	Tally t;
	auto throws = [](auto&& f) {
		try {
			f();
		} catch (const Error&) {
			return true;
		}
		return false;
	};
	t.check(throws([] { load_toric(data("bad_nonprimitive.json")); }), "non-primitive rejected");
	t.check(throws([] { load_toric(data("bad_unbounded.json")); }), "unbounded rejected");
	t.check(throws([] { formal_hessian(projective_space(2), Fiber{{make_rational(1, 2), make_rational(1, 2)}, {}}); }),
	        "boundary fiber rejected");

	struct Case
	{
		std::string args;
		int code;
	};
	const std::vector<Case> cases{
	    {"analyze --input CP2", 0},
	    {"analyze --input " + data("bad_nonprimitive.json"), 2},
	    {"analyze --input " + data("bad_unbounded.json"), 2},
	    {"analyze --input " + data("bad_float_offset.json"), 2},
	    {"analyze --input CP2 --fiber 1/2,1/2", 3},
	    {"analyze --input CP2 --fiber 0,1/2", 3},
	    {"analyze --input " + data("cp2_blowup.json"), 4},
	};
	for (const auto& c : cases) {
		int got = cli_exit_code(c.args);
		t.check(got == c.code, "'" + c.args + "' exited " + std::to_string(got));
	}
	return t;
}

} // namespace

int main()
{
	const std::vector<std::pair<std::string, std::function<Tally()>>> criteria{
	    {"CP1 equator rank and point product", equator_of_cp1},
	    {"CP2 solver, ranks and grid scan", projective_plane},
	    {"CP1xCP1 quadratic form", product_of_lines},
	    {"CPn barycenters, ranks and forms for n <= 6", projective_spaces},
	    {"l-products against derivatives of W", superpotential_oracle},
	    {"divisor equation", divisor_equation},
	    {"Clifford algebra laws", clifford_suite},
	    {"differential and rank dichotomy", differential_suite},
	    {"chain map and filtration", chain_map_suite},
	    {"errors and exit codes", robustness},
	};
	int failed = 0;
	for (std::size_t i = 0; i < criteria.size(); ++i) {
		const auto& [name, run] = criteria[i];
		auto start = std::chrono::steady_clock::now();
		Tally t;
		try {
			t = run();
		} catch (const std::exception& e) {
			t.check(false, std::string("exception: ") + e.what());
		}
		double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
		std::printf("%s criterion %zu: %s [%s, %.2fs]\n", t.passed() ? "PASS" : "FAIL", i + 1, name.c_str(),
		            t.summary().c_str(), secs);
		std::fflush(stdout);
		failed += t.passed() ? 0 : 1;
	}
	return failed == 0 ? 0 : 1;
}
