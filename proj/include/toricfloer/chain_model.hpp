#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "toricfloer/errors.hpp"
#include "toricfloer/floer_complex.hpp"
#include "toricfloer/novikov.hpp"
#include "toricfloer/toric.hpp"

namespace toricfloer {

/**
 * Data fixing the symbolic chain algebra at one fiber: n cycle generators
 * l_i, N disc boundaries d_j (both odd, degree 1) and one even degree-2
 * chain Q_c per area class, with boundary dQ_c = -sum_{j in I_c} d_j.
 */
struct ChainContext
{
	std::size_t n = 0;
	std::size_t num_discs = 0;
	std::vector<Rational> disc_area;  // e_j per disc
	std::vector<AreaClass> classes;   // I_1..I_l with their common areas
	std::vector<std::size_t> class_of; // disc -> class
	bool balanced = false;

	std::size_t num_classes() const { return classes.size(); }

	static ChainContext from(const ToricFano& x, const Fiber& f)
	{
		ChainContext ctx;
		auto discs = disc_areas(x, f);
		ctx.n = x.dim();
		ctx.num_discs = discs.size();
		if (ctx.n + ctx.num_discs > 64)
			throw DimensionMismatch("too many odd generators for the chain model");
		for (const auto& d : discs)
			ctx.disc_area.push_back(d.area);
		ctx.classes = area_partition(discs);
		ctx.class_of.assign(ctx.num_discs, 0);
		for (std::size_t c = 0; c < ctx.classes.size(); ++c)
			for (auto j : ctx.classes[c].members)
				ctx.class_of[j] = c;
		ctx.balanced = is_balanced(x, f).balanced;
		return ctx;
	}
};

/// Monomial Q^a * (odd generators in canonical order). Odd bit layout:
/// d_j at bit j, l_i at bit num_discs + i.
struct ChainMonomial
{
	std::vector<int> q_powers;
	std::uint64_t odd = 0;

	int degree() const
	{
		int d = std::popcount(odd);
		for (int a : q_powers)
			d += 2 * a;
		return d;
	}

	friend bool operator==(const ChainMonomial&, const ChainMonomial&) = default;
	friend bool operator<(const ChainMonomial& a, const ChainMonomial& b)
	{
		int da = a.degree(), db = b.degree();
		if (da != db)
			return da < db;
		if (a.q_powers != b.q_powers)
			return a.q_powers > b.q_powers;
		if (a.odd != b.odd) {
			std::uint64_t diff = a.odd ^ b.odd;
			std::uint64_t low = diff & (~diff + 1);
			return (a.odd & low) != 0;
		}
		return false;
	}
};

/// Element of the free graded-commutative chain algebra over the Novikov ring.
class ChainExpression
{
public:
	explicit ChainExpression(const ChainContext& ctx) : ctx_(&ctx) {}

	static ChainExpression scalar(const ChainContext& ctx, const NovikovElement& c)
	{
		ChainExpression e(ctx);
		e.add(ChainMonomial{std::vector<int>(ctx.num_classes(), 0), 0}, c);
		return e;
	}
	static ChainExpression one(const ChainContext& ctx) { return scalar(ctx, NovikovElement(1)); }

	/// Cycle generator l_i (0-based).
	static ChainExpression l(const ChainContext& ctx, std::size_t i)
	{
		if (i >= ctx.n)
			throw DimensionMismatch("l index out of range");
		return odd_generator(ctx, ctx.num_discs + i);
	}

	/// Disc boundary d_j (0-based).
	static ChainExpression d(const ChainContext& ctx, std::size_t j)
	{
		if (j >= ctx.num_discs)
			throw DimensionMismatch("d index out of range");
		return odd_generator(ctx, j);
	}

	/// Correction chain Q_c of area class c (0-based).
	static ChainExpression Q(const ChainContext& ctx, std::size_t c)
	{
		if (c >= ctx.num_classes())
			throw DimensionMismatch("Q index out of range");
		ChainMonomial m{std::vector<int>(ctx.num_classes(), 0), 0};
		m.q_powers[c] = 1;
		ChainExpression e(ctx);
		e.add(m, NovikovElement(1));
		return e;
	}

	/// Product l_S of the cycle generators in S, in increasing order.
	static ChainExpression l_monomial(const ChainContext& ctx, Subset s)
	{
		ChainExpression e = one(ctx);
		for (auto i : subset_indices(s))
			e = e * l(ctx, i);
		return e;
	}

	const ChainContext& context() const { return *ctx_; }
	const std::map<ChainMonomial, NovikovElement>& terms() const& { return terms_; }
	void terms() const&& = delete; // would dangle in a range-for
	bool is_zero() const { return terms_.empty(); }

	void add(const ChainMonomial& m, const NovikovElement& c)
	{
		if (c.is_zero())
			return;
		auto [it, inserted] = terms_.try_emplace(m, c);
		if (!inserted) {
			it->second += c;
			if (it->second.is_zero())
				terms_.erase(it);
		}
	}

	friend ChainExpression operator+(ChainExpression a, const ChainExpression& b)
	{
		for (const auto& [m, c] : b.terms_)
			a.add(m, c);
		return a;
	}
	friend ChainExpression operator-(const ChainExpression& a) { return NovikovElement(-1) * a; }
	friend ChainExpression operator-(const ChainExpression& a, const ChainExpression& b) { return a + (-b); }

	friend ChainExpression operator*(const NovikovElement& c, const ChainExpression& a)
	{
		ChainExpression r(*a.ctx_);
		for (const auto& [m, x] : a.terms_)
			r.add(m, c * x);
		return r;
	}

	friend ChainExpression operator*(const ChainExpression& a, const ChainExpression& b)
	{
		ChainExpression r(*a.ctx_);
		for (const auto& [ma, ca] : a.terms_)
			for (const auto& [mb, cb] : b.terms_) {
				if (ma.odd & mb.odd)
					continue;
				// sign of merging the two sorted odd words: one flip per pair
				// (x in a, y in b) with x above y
				int flips = 0;
				for (std::uint64_t rest = mb.odd; rest; rest &= rest - 1) {
					int y = std::countr_zero(rest);
					flips += std::popcount(y + 1 < 64 ? ma.odd >> (y + 1) : 0);
				}
				ChainMonomial m{ma.q_powers, ma.odd | mb.odd};
				for (std::size_t k = 0; k < m.q_powers.size(); ++k)
					m.q_powers[k] += mb.q_powers[k];
				NovikovElement c = ca * cb;
				r.add(m, flips % 2 ? -c : c);
			}
		return r;
	}

	friend bool operator==(const ChainExpression& a, const ChainExpression& b) { return a.terms_ == b.terms_; }

	/// True when only l generators occur.
	bool cycles_only() const
	{
		std::uint64_t d_mask = ctx_->num_discs == 0 ? 0 : (~std::uint64_t(0) >> (64 - ctx_->num_discs));
		for (const auto& [m, c] : terms_) {
			if (m.odd & d_mask)
				return false;
			for (int a : m.q_powers)
				if (a)
					return false;
		}
		return true;
	}

	/// Canonical text: terms in monomial order, "(coeff)*Q_1*d_2*l_1".
	std::string to_string(const RenderOptions& opt = {}) const
	{
		if (terms_.empty())
			return "0";
		std::ostringstream os;
		bool first = true;
		for (const auto& [m, c] : terms_) {
			os << (first ? "" : " + ") << "(" << c.to_string(opt) << ")";
			first = false;
			for (std::size_t k = 0; k < m.q_powers.size(); ++k)
				for (int p = 0; p < m.q_powers[k]; ++p)
					os << "*Q_" << k + 1;
			for (std::uint64_t rest = m.odd; rest; rest &= rest - 1) {
				auto bit = static_cast<std::size_t>(std::countr_zero(rest));
				if (bit < ctx_->num_discs)
					os << "*d_" << bit + 1;
				else
					os << "*l_" << bit - ctx_->num_discs + 1;
			}
		}
		return os.str();
	}

private:
	static ChainExpression odd_generator(const ChainContext& ctx, std::size_t bit)
	{
		ChainExpression e(ctx);
		e.add(ChainMonomial{std::vector<int>(ctx.num_classes(), 0), std::uint64_t(1) << bit}, NovikovElement(1));
		return e;
	}

	const ChainContext* ctx_;
	std::map<ChainMonomial, NovikovElement> terms_;
};

/// Boundary dQ_c = -sum_{j in I_c} d_j of one correction chain.
inline ChainExpression boundary_of_Q(const ChainContext& ctx, std::size_t c)
{
	ChainExpression out(ctx);
	for (auto j : ctx.classes.at(c).members)
		out = out - ChainExpression::d(ctx, j);
	return out;
}

/**
 * Graded derivation with dl_i = 0, dd_j = 0, dQ_c = -sum_{j in I_c} d_j.
 * Only the even Q's have nonzero boundary and they sit in front of every
 * monomial, so Leibniz contributes no signs.
 */
inline ChainExpression boundary(const ChainExpression& e)
{
	const ChainContext& ctx = e.context();
	ChainExpression out(ctx);
	for (const auto& [m, c] : e.terms()) {
		for (std::size_t k = 0; k < m.q_powers.size(); ++k) {
			if (m.q_powers[k] == 0)
				continue;
			ChainMonomial rest = m;
			rest.q_powers[k] -= 1;
			ChainExpression tail(ctx);
			tail.add(rest, c);
			out = out + NovikovElement(m.q_powers[k]) * (boundary_of_Q(ctx, k) * tail);
		}
	}
	return out;
}

/// m1 = (-1)^n d + (-1)^n sum_j T^{e_j} q d_j x (.)
inline ChainExpression m1_chain(const ChainExpression& e)
{
	const ChainContext& ctx = e.context();
	ChainExpression quantum(ctx);
	for (std::size_t j = 0; j < ctx.num_discs; ++j)
		quantum = quantum + NovikovElement::monomial(1, ctx.disc_area[j], 1) * (ChainExpression::d(ctx, j) * e);
	ChainExpression out = boundary(e) + quantum;
	return ctx.n % 2 ? -out : out;
}

/// Psi(P) = sum over subsets S of the area classes of (prod_{c in S} Q_c) P T^{sum e_c} q^{|S|}.
inline ChainExpression psi(const ChainExpression& p)
{
	const ChainContext& ctx = p.context();
	if (!ctx.balanced)
		throw NotBalanced("correction chains exist only at balanced fibers");
	if (!p.cycles_only())
		throw Error("psi expects a chain in the cycle generators l_i only");
	const std::size_t L = ctx.num_classes();
	if (L >= 31)
		throw DimensionMismatch("too many area classes");
	ChainExpression out(ctx);
	for (std::uint32_t s = 0; s < (std::uint32_t(1) << L); ++s) {
		ChainExpression factor = ChainExpression::one(ctx);
		Rational area = 0;
		for (auto c : subset_indices(s)) {
			factor = factor * ChainExpression::Q(ctx, c);
			area += ctx.classes[c].area;
		}
		NovikovElement weight = NovikovElement::monomial(1, area, std::popcount(s));
		out = out + weight * (factor * p);
	}
	return out;
}

/**
 * Linear substitution of one odd generator: bit -> sum of (coeff, bit').
 * The generator is first moved to the front (one sign per odd generator it
 * passes), then replaced.
 */
inline ChainExpression substitute_odd(const ChainExpression& e, std::size_t bit,
                                      const std::vector<std::pair<long, std::size_t>>& replacement)
{
	const ChainContext& ctx = e.context();
	const std::uint64_t mask = std::uint64_t(1) << bit;
	ChainExpression out(ctx);
	for (const auto& [m, c] : e.terms()) {
		if (!(m.odd & mask)) {
			out.add(m, c);
			continue;
		}
		int passed = std::popcount(m.odd & (mask - 1));
		ChainMonomial rest = m;
		rest.odd &= ~mask;
		ChainExpression tail(ctx);
		tail.add(rest, passed % 2 ? -c : c);
		for (const auto& [coef, b] : replacement) {
			ChainExpression g(ctx);
			g.add(ChainMonomial{std::vector<int>(ctx.num_classes(), 0), std::uint64_t(1) << b}, NovikovElement(coef));
			out = out + g * tail;
		}
	}
	return out;
}

/// Homology comparison d_j -> sum_i v_ji l_i, collapsing disc boundaries to cycles.
inline ChainExpression collapse_boundaries(const ChainExpression& e, const ToricFano& x)
{
	const ChainContext& ctx = e.context();
	ChainExpression out = e;
	for (std::size_t j = 0; j < ctx.num_discs; ++j) {
		std::vector<std::pair<long, std::size_t>> rep;
		for (std::size_t i = 0; i < ctx.n; ++i)
			if (x.facet(j).normal[i] != 0)
				rep.emplace_back(x.facet(j).normal[i], ctx.num_discs + i);
		out = substitute_odd(out, j, rep);
	}
	return out;
}

/// Reads a Q- and d-free expression as an exterior class (l_S -> e_S).
inline ExteriorClass to_exterior(const ChainExpression& e)
{
	const ChainContext& ctx = e.context();
	if (!e.cycles_only())
		throw Error("expression still contains Q or d generators");
	ExteriorClass out(ctx.n);
	for (const auto& [m, c] : e.terms())
		out.add(static_cast<Subset>(m.odd >> ctx.num_discs), c);
	return out;
}

/**
 * Reduces modulo the differential ideal generated by the self-products
 * Q_c * Q_c. Its generators are Q_c^2 and Q_c * s_c with s_c = -dQ_c; after
 * the change of odd basis d_{r_c} -> s_c (r_c the first disc of class c) the
 * ideal is monomial and reduction is dropping monomials.
 */
inline ChainExpression reduce_self_products(const ChainExpression& e)
{
	const ChainContext& ctx = e.context();
	ChainExpression out = e;
	std::uint64_t rep_bits = 0;
	for (const auto& cls : ctx.classes) {
		std::size_t r = cls.members.front();
		std::vector<std::pair<long, std::size_t>> rep{{1, r}};
		for (std::size_t k = 1; k < cls.members.size(); ++k)
			rep.emplace_back(-1, cls.members[k]);
		out = substitute_odd(out, r, rep);
		rep_bits |= std::uint64_t(1) << r;
	}
	ChainExpression kept(ctx);
	for (const auto& [m, c] : out.terms()) {
		bool in_ideal = false;
		for (std::size_t k = 0; k < m.q_powers.size(); ++k) {
			std::size_t r = ctx.classes[k].members.front();
			if (m.q_powers[k] >= 2 || (m.q_powers[k] >= 1 && (m.odd >> r & 1)))
				in_ideal = true;
		}
		if (!in_ideal)
			kept.add(m, c);
	}
	return kept;
}

struct ChainMapCheck
{
	bool chain_identity = false;        // residual vanishes modulo self-products
	bool filtration = false;            // Psi does not lower valuations
	std::size_t free_residual_terms = 0; // residual size in the free algebra
	std::size_t over_dimension_terms = 0; // terms of Psi(P) of degree > n (flagged)
	bool holds() const { return chain_identity && filtration; }
};

/// Checks m1(Psi(P)) = Psi(m_{1,0} P) with m_{1,0} = (-1)^n d, and the
/// energy filtration, for a chain P in the cycle generators.
inline ChainMapCheck check_chain_map(const ChainExpression& p)
{
	const ChainContext& ctx = p.context();
	ChainExpression image = psi(p);
	ChainExpression classical = boundary(p);
	if (ctx.n % 2)
		classical = -classical;
	ChainExpression residual = m1_chain(image) - psi(classical);

	ChainMapCheck out;
	out.free_residual_terms = residual.terms().size();
	out.chain_identity = reduce_self_products(residual).is_zero();
	for (const auto& [m, c] : image.terms())
		if (m.degree() > static_cast<int>(ctx.n))
			++out.over_dimension_terms;

	out.filtration = true;
	for (const auto& [m, c] : p.terms()) {
		ChainExpression single(ctx);
		single.add(m, c);
		const Rational v_in = *c.valuation();
		const ChainExpression corrected = psi(single);
		for (const auto& [mm, cc] : corrected.terms())
			if (*cc.valuation() < v_in)
				out.filtration = false;
	}
	return out;
}

inline bool verify_chain_map(const ChainExpression& p)
{
	return check_chain_map(p).holds();
}

} // namespace toricfloer
