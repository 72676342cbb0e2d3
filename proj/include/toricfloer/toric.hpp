#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "toricfloer/errors.hpp"
#include "toricfloer/rational.hpp"

namespace toricfloer {

using RationalVector = std::vector<Rational>;
using IntVector = std::vector<long>;

/// Half-space <u, normal> >= offset bounding the moment polytope.
struct Facet
{
	IntVector normal;
	Rational offset;
};

/// Interior point of the moment polytope, optionally with holonomy angles
/// (in turns) of a flat line bundle.
struct Fiber
{
	RationalVector u;
	std::optional<RationalVector> holonomy;
};

/// Maslov index two disc attached to facet `index` (0-based).
struct DiscClass
{
	std::size_t index = 0;
	IntVector normal;
	Rational area;
	int maslov = 2;
};

/// Facets whose discs share one symplectic area.
struct AreaClass
{
	Rational area;
	std::vector<std::size_t> members; // 0-based facet indices, ascending
};

struct BalanceReport
{
	bool balanced = false;
	std::vector<AreaClass> classes;
	std::vector<IntVector> normal_sums; // one per class
};

namespace detail {

// Exact rank and a nonzero kernel vector (when corank is one) by
// fraction-based Gaussian elimination.
struct RowReduction
{
	std::size_t rank = 0;
	std::vector<std::size_t> pivot_cols;
	std::vector<RationalVector> rows; // reduced row echelon form
};

inline RowReduction row_reduce(std::vector<RationalVector> rows, std::size_t cols)
{
	RowReduction out;
	std::size_t r = 0;
	for (std::size_t c = 0; c < cols && r < rows.size(); ++c) {
		std::size_t piv = r;
		while (piv < rows.size() && rows[piv][c] == 0)
			++piv;
		if (piv == rows.size())
			continue;
		std::swap(rows[r], rows[piv]);
		Rational inv = 1 / rows[r][c];
		for (auto& x : rows[r])
			x *= inv;
		for (std::size_t i = 0; i < rows.size(); ++i) {
			if (i == r || rows[i][c] == 0)
				continue;
			Rational f = rows[i][c];
			for (std::size_t k = 0; k < cols; ++k)
				rows[i][k] -= f * rows[r][k];
		}
		out.pivot_cols.push_back(c);
		++r;
	}
	rows.resize(r);
	out.rank = r;
	out.rows = std::move(rows);
	return out;
}

// Some nonzero vector in the kernel of the reduced system.
inline RationalVector kernel_vector(const RowReduction& red, std::size_t cols)
{
	std::vector<bool> is_pivot(cols, false);
	for (auto c : red.pivot_cols)
		is_pivot[c] = true;
	std::size_t free_col = 0;
	while (free_col < cols && is_pivot[free_col])
		++free_col;
	RationalVector x(cols, Rational(0));
	if (free_col == cols)
		return x;
	x[free_col] = 1;
	for (std::size_t i = 0; i < red.rank; ++i)
		x[red.pivot_cols[i]] = -red.rows[i][free_col];
	return x;
}

// Visits every k-subset of {0..n-1} in lexicographic order.
template <class F>
void for_each_subset(std::size_t n, std::size_t k, F&& f)
{
	if (k > n)
		return;
	std::vector<std::size_t> idx(k);
	std::iota(idx.begin(), idx.end(), 0);
	while (true) {
		f(std::span<const std::size_t>(idx));
		std::size_t i = k;
		while (i > 0 && idx[i - 1] == n - k + i - 1)
			--i;
		if (i == 0)
			return;
		++idx[i - 1];
		for (std::size_t j = i; j < k; ++j)
			idx[j] = idx[j - 1] + 1;
	}
}

inline long gcd_of(const IntVector& v)
{
	long g = 0;
	for (long x : v)
		g = std::gcd(g, x);
	return g;
}

} // namespace detail

/**
 * Moment-polytope data {u : <u, v_k> >= lambda_k} of a toric Fano manifold.
 *
 * Construction validates primitivity, boundedness and nonempty interior.
 * Fano-ness itself is trusted, not checked.
 */
class ToricFano
{
public:
	ToricFano(std::string name, std::size_t dim, std::vector<Facet> facets)
	    : name_(std::move(name)), dim_(dim), facets_(std::move(facets))
	{
		validate();
	}

	const std::string& name() const { return name_; }
	std::size_t dim() const { return dim_; }
	std::size_t num_facets() const { return facets_.size(); }
	const std::vector<Facet>& facets() const { return facets_; }
	const Facet& facet(std::size_t k) const { return facets_.at(k); }

	/// Vertices of the polytope (exact).
	const std::vector<RationalVector>& vertices() const { return vertices_; }

	/// Average of the vertices; strictly interior for a full-dimensional polytope.
	const RationalVector& vertex_centroid() const { return centroid_; }

	/// Affine distance <u, v_k> - lambda_k of u to facet k.
	Rational affine_distance(std::span<const Rational> u, std::size_t k) const
	{
		const Facet& f = facets_.at(k);
		Rational s = -f.offset;
		for (std::size_t i = 0; i < dim_; ++i)
			s += u[i] * f.normal[i];
		return s;
	}

	bool is_interior(std::span<const Rational> u) const
	{
		if (u.size() != dim_)
			return false;
		for (std::size_t k = 0; k < facets_.size(); ++k)
			if (affine_distance(u, k) <= 0)
				return false;
		return true;
	}

	/// Componentwise lower/upper bounds of the polytope.
	std::pair<RationalVector, RationalVector> bounding_box() const
	{
		RationalVector lo = vertices_.front(), hi = vertices_.front();
		for (const auto& v : vertices_)
			for (std::size_t i = 0; i < dim_; ++i) {
				lo[i] = std::min(lo[i], v[i]);
				hi[i] = std::max(hi[i], v[i]);
			}
		return {lo, hi};
	}

private:
	void validate()
	{
		if (dim_ == 0)
			throw InvalidPolytope("dimension must be positive");
		if (facets_.size() < dim_ + 1)
			throw InvalidPolytope("need at least dim+1 facets, got " + std::to_string(facets_.size()));
		for (std::size_t k = 0; k < facets_.size(); ++k) {
			const auto& v = facets_[k].normal;
			if (v.size() != dim_)
				throw InvalidPolytope("facet " + std::to_string(k + 1) + " normal has wrong length");
			if (std::abs(detail::gcd_of(v)) != 1)
				throw InvalidPolytope("facet " + std::to_string(k + 1) + " normal is not primitive");
		}
		check_bounded();
		enumerate_vertices();
		if (vertices_.empty())
			throw InvalidPolytope("polytope is empty");
		centroid_.assign(dim_, Rational(0));
		for (const auto& v : vertices_)
			for (std::size_t i = 0; i < dim_; ++i)
				centroid_[i] += v[i];
		for (auto& c : centroid_)
			c /= Rational(static_cast<long>(vertices_.size()));
		if (!is_interior(centroid_))
			throw InvalidPolytope("polytope has empty interior");
	}

	// Bounded iff the recession cone {d : <d, v_k> >= 0} is {0}. With full
	// rank normals that cone is pointed, so it is nontrivial iff some extreme
	// ray exists; every extreme ray is cut out by dim-1 independent normals.
	void check_bounded() const
	{
		std::vector<RationalVector> all;
		for (const auto& f : facets_)
			all.push_back(as_rational(f.normal));
		if (detail::row_reduce(all, dim_).rank < dim_)
			throw InvalidPolytope("normals do not span; polytope is unbounded");
		bool unbounded = false;
		detail::for_each_subset(facets_.size(), dim_ - 1, [&](std::span<const std::size_t> sub) {
			if (unbounded)
				return;
			std::vector<RationalVector> rows;
			for (auto k : sub)
				rows.push_back(as_rational(facets_[k].normal));
			auto red = detail::row_reduce(rows, dim_);
			if (red.rank != dim_ - 1)
				return;
			RationalVector d = detail::kernel_vector(red, dim_);
			for (int sign : {1, -1}) {
				bool all_nonneg = true;
				for (const auto& f : facets_) {
					Rational s = 0;
					for (std::size_t i = 0; i < dim_; ++i)
						s += d[i] * f.normal[i];
					if (sign * s < 0) {
						all_nonneg = false;
						break;
					}
				}
				if (all_nonneg)
					unbounded = true;
			}
		});
		if (unbounded)
			throw InvalidPolytope("normals do not positively span; polytope is unbounded");
	}

	void enumerate_vertices()
	{
		std::vector<RationalVector> found;
		detail::for_each_subset(facets_.size(), dim_, [&](std::span<const std::size_t> sub) {
			std::vector<RationalVector> rows;
			for (auto k : sub) {
				RationalVector row = as_rational(facets_[k].normal);
				row.push_back(facets_[k].offset);
				rows.push_back(std::move(row));
			}
			auto red = detail::row_reduce(rows, dim_ + 1);
			if (red.rank != dim_ || red.pivot_cols.back() >= dim_)
				return;
			RationalVector x(dim_);
			for (std::size_t i = 0; i < dim_; ++i)
				x[red.pivot_cols[i]] = red.rows[i][dim_];
			for (std::size_t k = 0; k < facets_.size(); ++k)
				if (affine_distance(x, k) < 0)
					return;
			if (std::find(found.begin(), found.end(), x) == found.end())
				found.push_back(std::move(x));
		});
		std::sort(found.begin(), found.end());
		vertices_ = std::move(found);
	}

	static RationalVector as_rational(const IntVector& v)
	{
		RationalVector r;
		for (long x : v)
			r.emplace_back(x);
		return r;
	}

	std::string name_;
	std::size_t dim_;
	std::vector<Facet> facets_;
	std::vector<RationalVector> vertices_;
	RationalVector centroid_;
};

/// Standard simplex presentation: normals e_1..e_n, -(1,..,1); offsets 0,..,0,-1.
inline ToricFano projective_space(std::size_t n)
{
	if (n == 0)
		throw ParseError("CPn needs n >= 1");
	std::vector<Facet> facets;
	for (std::size_t i = 0; i < n; ++i) {
		IntVector v(n, 0);
		v[i] = 1;
		facets.push_back({v, Rational(0)});
	}
	facets.push_back({IntVector(n, -1), Rational(-1)});
	std::string name = n <= 2 ? "CP" + std::to_string(n) : "CPn(" + std::to_string(n) + ")";
	return ToricFano(name, n, std::move(facets));
}

/// Unit square: normals (1,0),(-1,0),(0,1),(0,-1); offsets 0,-1,0,-1.
inline ToricFano cp1_x_cp1()
{
	return ToricFano("CP1xCP1", 2,
	                 {{{1, 0}, Rational(0)}, {{-1, 0}, Rational(-1)}, {{0, 1}, Rational(0)}, {{0, -1}, Rational(-1)}});
}

/// Recognizes CP1, CP2, CP<k>, CPn(<k>) and CP1xCP1.
inline std::optional<ToricFano> builtin_toric(const std::string& name)
{
	if (name == "CP1xCP1")
		return cp1_x_cp1();
	static const std::regex plain(R"(^CP(\d+)$)"), param(R"(^CPn\((\d+)\)$)");
	std::smatch m;
	if (std::regex_match(name, m, plain) || std::regex_match(name, m, param)) {
		unsigned long n = std::stoul(m[1].str());
		if (n < 1 || n > 20)
			throw ParseError("unsupported projective space dimension " + m[1].str());
		return projective_space(n);
	}
	return std::nullopt;
}

/// Parses {"name", "dim", "facets": [{"normal": [...], "offset": "p/q"}]}.
inline ToricFano toric_from_json(const nlohmann::json& doc)
{
	try {
		if (!doc.is_object())
			throw ParseError("polytope document must be a JSON object");
		std::string name = doc.value("name", std::string("unnamed"));
		const auto& dim_node = doc.at("dim");
		if (!dim_node.is_number_integer() || dim_node.get<long>() <= 0)
			throw ParseError("'dim' must be a positive integer");
		auto dim = dim_node.get<std::size_t>();
		const auto& facet_nodes = doc.at("facets");
		if (!facet_nodes.is_array())
			throw ParseError("'facets' must be an array");
		std::vector<Facet> facets;
		for (const auto& node : facet_nodes) {
			Facet f;
			for (const auto& x : node.at("normal")) {
				if (!x.is_number_integer())
					throw ParseError("normal entries must be integers, got " + x.dump());
				f.normal.push_back(x.get<long>());
			}
			const auto& off = node.at("offset");
			if (off.is_string())
				f.offset = parse_rational(off.get<std::string>());
			else if (off.is_number_integer())
				f.offset = Rational(off.get<long>());
			else
				throw ParseError("offset must be an exact rational string, got " + off.dump());
			facets.push_back(std::move(f));
		}
		return ToricFano(name, dim, std::move(facets));
	} catch (const nlohmann::json::exception& e) {
		throw ParseError(std::string("malformed polytope JSON: ") + e.what());
	}
}

inline ToricFano toric_from_json_text(const std::string& text)
{
	nlohmann::json doc;
	try {
		doc = nlohmann::json::parse(text);
	} catch (const nlohmann::json::exception& e) {
		throw ParseError(std::string("invalid JSON: ") + e.what());
	}
	return toric_from_json(doc);
}

inline nlohmann::json toric_to_json(const ToricFano& x)
{
	nlohmann::json facets = nlohmann::json::array();
	for (const auto& f : x.facets())
		facets.push_back({{"normal", f.normal}, {"offset", to_string(f.offset)}});
	return {{"name", x.name()}, {"dim", x.dim()}, {"facets", facets}};
}

/// Disc areas e_k = <u, v_k> - lambda_k in facet order.
inline std::vector<DiscClass> disc_areas(const ToricFano& x, const Fiber& f)
{
	if (f.u.size() != x.dim())
		throw DimensionMismatch("fiber has " + std::to_string(f.u.size()) + " coordinates, polytope dimension is " +
		                        std::to_string(x.dim()));
	std::vector<DiscClass> out;
	for (std::size_t k = 0; k < x.num_facets(); ++k) {
		Rational e = x.affine_distance(f.u, k);
		if (e <= 0)
			throw NotInterior("fiber is not interior: distance to facet " + std::to_string(k + 1) + " is " +
			                  to_string(e));
		out.push_back({k, x.facet(k).normal, e, 2});
	}
	return out;
}

/// Groups disc indices by exactly equal area, classes sorted by area.
inline std::vector<AreaClass> area_partition(std::span<const DiscClass> discs)
{
	std::map<Rational, std::vector<std::size_t>> groups;
	for (const auto& d : discs)
		groups[d.area].push_back(d.index);
	std::vector<AreaClass> out;
	for (auto& [area, members] : groups) {
		std::sort(members.begin(), members.end());
		out.push_back({area, std::move(members)});
	}
	return out;
}

/// Balanced iff the normals of every area class sum to zero (trivial holonomy).
inline BalanceReport is_balanced(const ToricFano& x, const Fiber& f)
{
	auto discs = disc_areas(x, f);
	BalanceReport r;
	r.classes = area_partition(discs);
	r.balanced = true;
	for (const auto& c : r.classes) {
		IntVector sum(x.dim(), 0);
		for (auto k : c.members)
			for (std::size_t i = 0; i < x.dim(); ++i)
				sum[i] += x.facet(k).normal[i];
		if (std::any_of(sum.begin(), sum.end(), [](long s) { return s != 0; }))
			r.balanced = false;
		r.normal_sums.push_back(std::move(sum));
	}
	return r;
}

} // namespace toricfloer
