#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "toricfloer/chain_model.hpp"
#include "toricfloer/clifford.hpp"
#include "toricfloer/errors.hpp"
#include "toricfloer/floer_complex.hpp"
#include "toricfloer/potential.hpp"
#include "toricfloer/toric.hpp"

namespace toricfloer {

/// Built-in name, or path to a JSON polytope document.
inline ToricFano load_toric(const std::string& input)
{
	if (auto b = builtin_toric(input))
		return *b;
	std::ifstream in(input);
	if (!in)
		throw ParseError("'" + input + "' is neither a built-in polytope nor a readable file");
	std::stringstream buf;
	buf << in.rdbuf();
	return toric_from_json_text(buf.str());
}

/// Comma-separated rationals, e.g. "1/4,1/4".
inline RationalVector parse_fiber(const std::string& text, std::size_t n)
{
	RationalVector u;
	std::stringstream ss(text);
	std::string item;
	while (std::getline(ss, item, ','))
		u.push_back(parse_rational(item));
	if (u.size() != n)
		throw ParseError("fiber has " + std::to_string(u.size()) + " coordinates, expected " + std::to_string(n));
	return u;
}

struct AnalyzeOptions
{
	std::optional<RationalVector> fiber; // solver output when absent
	std::size_t lmax = 3;
	bool two_pi = false;
	bool numeric = false;
	SolverOptions solver;
};

namespace detail {

inline nlohmann::json rational_array(std::span<const Rational> v)
{
	nlohmann::json a = nlohmann::json::array();
	for (const auto& r : v)
		a.push_back(to_string(r));
	return a;
}

inline nlohmann::json form_json(const QuadraticForm& q, const RenderOptions& opt)
{
	nlohmann::json rows = nlohmann::json::array();
	for (std::size_t i = 0; i < q.dim(); ++i) {
		nlohmann::json row = nlohmann::json::array();
		for (std::size_t j = 0; j < q.dim(); ++j)
			row.push_back(q(i, j).to_string(opt));
		rows.push_back(row);
	}
	return rows;
}

// Calls f on every nondecreasing index tuple of length m over {0..n-1}.
template <class F>
void for_each_multiindex(std::size_t n, std::size_t m, F&& f)
{
	std::vector<std::size_t> idx(m, 0);
	while (true) {
		f(std::span<const std::size_t>(idx));
		std::size_t k = m;
		while (k > 0 && idx[k - 1] == n - 1)
			--k;
		if (k == 0)
			return;
		++idx[k - 1];
		for (std::size_t j = k; j < m; ++j)
			idx[j] = idx[k - 1];
	}
}

} // namespace detail

/**
 * Full pipeline at one fiber. The report is plain JSON with sorted keys and
 * rational values as strings; render_text derives the text form from it.
 */
inline nlohmann::json analyze(const ToricFano& x, const AnalyzeOptions& opt = {})
{
	const RenderOptions ropt{opt.two_pi};
	nlohmann::json r;
	r["toric"] = toric_to_json(x);

	Fiber f;
	nlohmann::json fiber;
	if (opt.fiber) {
		f.u = *opt.fiber;
		fiber["source"] = "given";
		fiber["exact"] = true;
	} else {
		const auto& c = x.vertex_centroid();
		std::vector<double> init;
		for (const auto& v : c)
			init.push_back(to_double(v));
		CriticalFiber cf = find_critical_fiber(x, std::span<const double>(init), opt.solver);
		fiber["source"] = "solver";
		fiber["float"] = cf.point;
		r["solver"] = {{"iterations", cf.iterations}, {"gradient_norm", cf.gradient_norm}};
		if (cf.exact) {
			f = *cf.exact;
			fiber["exact"] = true;
		} else {
			// exact algebra continues at the rounded point, which is not balanced
			for (double c : cf.point)
				f.u.push_back(round_rational(c, opt.solver.rounding_denominator));
			fiber["exact"] = false;
		}
	}
	fiber["u"] = detail::rational_array(f.u);
	r["fiber"] = fiber;

	auto discs = disc_areas(x, f);
	nlohmann::json areas = nlohmann::json::array();
	for (const auto& d : discs)
		areas.push_back(to_string(d.area));
	r["disc_areas"] = areas;

	BalanceReport bal = is_balanced(x, f);
	nlohmann::json classes = nlohmann::json::array();
	for (std::size_t c = 0; c < bal.classes.size(); ++c) {
		std::vector<std::size_t> members;
		for (auto k : bal.classes[c].members)
			members.push_back(k + 1);
		classes.push_back({{"area", to_string(bal.classes[c].area)},
		                   {"members", members},
		                   {"normal_sum", bal.normal_sums[c]}});
	}
	r["area_classes"] = classes;
	r["balanced"] = bal.balanced;

	HfRank hf = hf_rank_details(x, f);
	r["hf_rank"] = hf.rank;
	r["m1_rank"] = hf.m1_rank;
	r["rank_cutoff"] = to_string(hf.elimination.cutoff);

	QuadraticForm q = formal_hessian(x, f);
	r["Q"] = detail::form_json(q, ropt);

	if (bal.balanced) {
		r["clifford"] = {{"relations", clifford_relations(q, ropt)}};

		ChainContext ctx = ChainContext::from(x, f);
		bool all_hold = true, filtration = true;
		std::size_t residual = 0, over_dim = 0, checked = 0;
		for (Subset s = 0; s < (Subset(1) << x.dim()); ++s) {
			ChainMapCheck c = check_chain_map(ChainExpression::l_monomial(ctx, s));
			all_hold = all_hold && c.holds();
			filtration = filtration && c.filtration;
			residual += c.free_residual_terms;
			over_dim += c.over_dimension_terms;
			++checked;
		}
		r["chain_map"] = {{"monomials_checked", checked},
		                  {"holds", all_hold},
		                  {"filtration", filtration},
		                  {"free_residual_terms", residual},
		                  {"over_dimension_terms", over_dim}};
	}

	const ComplexVector theta = theta_of(f);
	nlohmann::json table = nlohmann::json::array();
	for (std::size_t m = 0; m <= opt.lmax; ++m)
		detail::for_each_multiindex(x.dim(), m, [&](std::span<const std::size_t> idx) {
			NovikovElement v = l_product(x, f, idx);
			std::vector<std::size_t> one_based;
			for (auto i : idx)
				one_based.push_back(i + 1);
			nlohmann::json row = {{"indices", one_based}, {"value", v.to_string(ropt)}};
			if (opt.numeric) {
				double sign = ((x.dim() - 1) * m) % 2 ? -1.0 : 1.0;
				row["numeric"] = v.numeric();
				row["w_derivative"] = sign * eval_W_derivative(x, std::span<const std::complex<double>>(theta), idx).real();
			}
			table.push_back(row);
		});
	r["l_products"] = table;

	nlohmann::json conv;
	conv["area_units"] = opt.two_pi ? "2pi-scaled" : "affine";
	conv["clifford_diagonal"] = "C_i*C_i = (1/2)*Q_ii";
	conv["offdiagonal_flag"] = q.has_nonzero_offdiagonal();
	if (q.has_nonzero_offdiagonal()) {
		conv["Q_halved_offdiagonal"] = detail::form_json(q.offdiagonal_scaled(make_rational(1, 2)), ropt);
		conv["offdiagonal_note"] =
		    "Q_ij is sum_k v_ki v_kj T^{e_k} q; Q_halved_offdiagonal lists the variant with off-diagonal entries halved";
	}
	r["conventions"] = conv;
	return r;
}

/// Balanced fibers on the grid of step 1/grid inside the polytope.
inline nlohmann::json scan(const ToricFano& x, long grid)
{
	if (grid < 2)
		throw ParseError("grid must be at least 2");
	auto [lo, hi] = x.bounding_box();
	const std::size_t n = x.dim();
	std::vector<long> first(n), last(n);
	for (std::size_t i = 0; i < n; ++i) {
		// k/grid within [lo, hi]
		Integer a = numerator(lo[i] * grid), b = denominator(lo[i] * grid);
		Integer lo_k = a / b + ((a % b != 0 && a > 0) ? 1 : 0);
		Integer c = numerator(hi[i] * grid), d = denominator(hi[i] * grid);
		Integer hi_k = c / d - ((c % d != 0 && c < 0) ? 1 : 0);
		first[i] = lo_k.convert_to<long>();
		last[i] = hi_k.convert_to<long>();
	}
	nlohmann::json balanced = nlohmann::json::array();
	std::map<std::size_t, std::size_t> ranks;
	std::size_t interior = 0;
	std::vector<long> k = first;
	bool done = false;
	for (std::size_t i = 0; i < n; ++i)
		if (first[i] > last[i])
			done = true;
	while (!done) {
		Fiber f;
		for (auto ki : k)
			f.u.push_back(make_rational(ki, grid));
		if (x.is_interior(f.u)) {
			++interior;
			bool b = is_balanced(x, f).balanced;
			std::size_t rank = hf_rank(x, f);
			++ranks[rank];
			if (b)
				balanced.push_back({{"u", detail::rational_array(f.u)}, {"hf_rank", rank}});
		}
		std::size_t i = 0;
		while (i < n && k[i] == last[i])
			k[i] = first[i], ++i;
		if (i == n)
			done = true;
		else
			++k[i];
	}
	nlohmann::json hist = nlohmann::json::object();
	for (auto [rank, count] : ranks)
		hist[std::to_string(rank)] = count;
	return {{"toric", x.name()},
	        {"grid", grid},
	        {"interior_points", interior},
	        {"balanced_fibers", balanced},
	        {"hf_rank_counts", hist}};
}

namespace detail {

inline void flatten(const nlohmann::json& node, const std::string& path, std::ostringstream& os)
{
	auto scalar = [](const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
	if (node.is_object()) {
		for (const auto& [key, value] : node.items())
			flatten(value, path.empty() ? key : path + "." + key, os);
		return;
	}
	if (node.is_array()) {
		bool flat = std::all_of(node.begin(), node.end(), [](const nlohmann::json& e) { return e.is_primitive(); });
		if (flat && !node.empty() && !node.front().is_string()) {
			os << path << ": " << node.dump() << "\n";
			return;
		}
		if (node.empty()) {
			os << path << ": []\n";
			return;
		}
		for (std::size_t i = 0; i < node.size(); ++i)
			flatten(node[i], path + "[" + std::to_string(i + 1) + "]", os);
		return;
	}
	os << path << ": " << scalar(node) << "\n";
}

} // namespace detail

/// One "path: value" line per leaf, keys in JSON order, arrays 1-based.
inline std::string render_text(const nlohmann::json& report)
{
	std::ostringstream os;
	detail::flatten(report, "", os);
	return os.str();
}

} // namespace toricfloer
