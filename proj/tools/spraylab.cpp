// spraylab: list | evaluate | verify

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spraylab/errors.hpp"
#include "spraylab/report.hpp"

namespace {

struct Options {
    std::string spray;
    std::string file;
    std::vector<std::string> sigmas;
    int points = 0;
    std::uint64_t seed = 1;
    int order = spraylab::kDefaultOrder;
    std::vector<std::string> tols;
    std::string format = "text";
    std::string out;
};

void add_run_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--spray", o.spray, "zoo family, e.g. sphere:n=3,kappa=1");
    cmd->add_option("--file", o.file, "spray-definition file")->check(CLI::ExistingFile);
    cmd->add_option("--sigma", o.sigmas, "volume density sigma(x); repeatable")->allow_extra_args(false);
    cmd->add_option("--points", o.points, "number of seeded sample points")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", o.seed, "sampling seed");
    cmd->add_option("--order", o.order, "jet order of the spray coefficients")->check(CLI::Range(0, 8));
    cmd->add_option("--tol", o.tols, "global tolerance or row_id=value; repeatable")->allow_extra_args(false);
    cmd->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));
    cmd->add_option("--out", o.out, "write the report to this file");
}

spraylab::RunConfig to_config(const Options& o) {
    spraylab::RunConfig cfg;
    if (!o.spray.empty() && !o.file.empty()) throw spraylab::InputError("--spray and --file are mutually exclusive");
    if (!o.spray.empty()) spraylab::parse_spray_spec(o.spray, cfg);
    if (!o.file.empty()) {
        cfg.file = o.file;
        cfg.family = "custom";
    }
    cfg.sigmas = o.sigmas;
    cfg.points = o.points;
    cfg.seed = o.seed;
    cfg.order = o.order;
    for (const auto& t : o.tols) spraylab::parse_tolerance(t, cfg);
    cfg.format = o.format == "json" ? spraylab::OutputFormat::Json : spraylab::OutputFormat::Text;
    if (!o.out.empty()) cfg.out = o.out;
    return cfg;
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::cout << text;
        std::cout.flush();
    } else {
        spraylab::write_atomic(out, text);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Curvature of sprays and Finsler metrics with forward-mode jets"};
    app.set_version_flag("--version", spraylab::kVersion);
    app.require_subcommand(1);

    Options o;
    auto* list = app.add_subcommand("list", "list the built-in spray families");
    list->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));
    list->add_option("--out", o.out, "write the listing to this file");
    auto* evaluate = app.add_subcommand("evaluate", "curvature quantities at seeded points");
    add_run_flags(evaluate, o);
    auto* verify = app.add_subcommand("verify", "run the identity suite at seeded points");
    add_run_flags(verify, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (list->parsed()) {
            emit(o.format == "json" ? spraylab::canonical_dump(spraylab::list_json()) : spraylab::cmd_list(), o.out);
            return 0;
        }
        const spraylab::RunConfig cfg = to_config(o);
        const spraylab::Report r = evaluate->parsed() ? spraylab::cmd_evaluate(cfg) : spraylab::cmd_verify(cfg);
        emit(spraylab::render(r, cfg.format), o.out);
        if (cfg.format == spraylab::OutputFormat::Json || cfg.out) {
            std::fprintf(stderr, "%s: %d rows, %d failed (%.2f s)\n", r.command.c_str(), static_cast<int>(r.rows.size()),
                         r.failed(), r.seconds);
        }
        return r.exit_code();
    } catch (const spraylab::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    }
}
