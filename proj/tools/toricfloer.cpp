#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "toricfloer/report.hpp"

namespace {

enum ExitCode : int
{
	exit_ok = 0,
	exit_usage = 1,
	exit_input = 2,
	exit_not_interior = 3,
	exit_no_convergence = 4,
	exit_other = 5,
};

void emit(const nlohmann::json& report, const std::string& format)
{
	if (format == "json")
		std::cout << report.dump(2) << "\n";
	else
		std::cout << toricfloer::render_text(report);
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"Floer cohomology of Lagrangian torus fibers in toric Fano manifolds"};
	app.require_subcommand(1);

	std::string input, fiber, format = "text";
	std::size_t lmax = 3;
	long grid = 12;
	bool two_pi = false, numeric = false;
	toricfloer::SolverOptions solver;

	auto* analyze = app.add_subcommand("analyze", "Run the full pipeline at one fiber");
	analyze->add_option("--input", input, "Built-in name (CP1, CP2, CPn(k), CP1xCP1) or JSON polytope path")->required();
	analyze->add_option("--fiber", fiber, "Interior point as comma-separated rationals; default: critical point of W");
	analyze->add_option("--lmax", lmax, "Largest m in the l_m table")->capture_default_str();
	analyze->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
	analyze->add_flag("--two-pi", two_pi, "Display Novikov exponents scaled by 2pi");
	analyze->add_flag("--numeric", numeric, "Add T^e -> exp(-e), q -> 1 values and W-derivatives to the l_m table");
	analyze->add_option("--tol", solver.tol, "Newton tolerance on |grad W|")->capture_default_str();
	analyze->add_option("--max-iters", solver.max_iters, "Newton iteration limit")->capture_default_str();

	auto* scan = app.add_subcommand("scan", "Find balanced fibers on a rational grid");
	scan->add_option("--input", input, "Built-in name or JSON polytope path")->required();
	scan->add_option("--grid", grid, "Grid denominator (step 1/grid)")->capture_default_str();
	scan->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError& e) {
		int code = app.exit(e, std::cout, std::cerr);
		return code == 0 ? exit_ok : exit_usage;
	}

	try {
		toricfloer::ToricFano x = toricfloer::load_toric(input);
		if (*analyze) {
			toricfloer::AnalyzeOptions opt;
			if (!fiber.empty())
				opt.fiber = toricfloer::parse_fiber(fiber, x.dim());
			opt.lmax = lmax;
			opt.two_pi = two_pi;
			opt.numeric = numeric;
			opt.solver = solver;
			emit(toricfloer::analyze(x, opt), format);
		} else {
			emit(toricfloer::scan(x, grid), format);
		}
	} catch (const toricfloer::ParseError& e) {
		std::cerr << "parse error: " << e.what() << "\n";
		return exit_input;
	} catch (const toricfloer::InvalidPolytope& e) {
		std::cerr << "invalid polytope: " << e.what() << "\n";
		return exit_input;
	} catch (const toricfloer::NotInterior& e) {
		std::cerr << "not interior: " << e.what() << "\n";
		return exit_not_interior;
	} catch (const toricfloer::NoConvergence& e) {
		std::cerr << "no convergence: " << e.what() << "\n";
		return exit_no_convergence;
	} catch (const std::exception& e) {
		std::cerr << "error: " << e.what() << "\n";
		return exit_other;
	}
	return exit_ok;
}
