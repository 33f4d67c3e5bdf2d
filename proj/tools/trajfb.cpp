// Command-line front end: run experiments, summarize regret CSVs, run the
// verification suites, and generate environment files.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "trajfb/trajfb.hpp"

namespace {

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw trajfb::ConfigError("cannot open file: " + path);
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw trajfb::ConfigError("cannot parse JSON in " + path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw trajfb::ConfigError("cannot open output file: " + path);
    f << text;
    if (!f) throw trajfb::ConfigError("failed writing output file: " + path);
}

int cmd_run(const std::string& config_path, const std::string& out_arg, int threads) {
    trajfb::ExperimentConfig cfg = trajfb::parse_experiment_config(load_json_file(config_path));
    std::string out = out_arg.empty() ? cfg.out : out_arg;
    if (out.empty())
        throw trajfb::ConfigError("no output path: pass --out or set \"out\" in the config");
    std::vector<trajfb::RegretRecord> records = trajfb::run_experiment(cfg, threads);
    trajfb::write_records_csv(records, out);
    std::cerr << "wrote " << records.size() << " records to " << out << "\n";
    return 0;
}

int cmd_summarize(const std::string& in_path, const std::string& out_path) {
    std::vector<trajfb::RegretRecord> records = trajfb::read_records_csv(in_path);
    nlohmann::json summary = trajfb::summarize(records);
    std::string text = summary.dump(2);
    text += '\n';
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_text_file(out_path, text);
    }
    return 0;
}

int cmd_check(const std::string& suite, const std::string& out_path) {
    trajfb::SuiteReport rep = trajfb::run_check_suite(suite);
    std::string text = rep.report.dump(2);
    text += '\n';
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_text_file(out_path, text);
    }
    if (!rep.pass) {
        std::cerr << "check suite '" << suite << "' FAILED\n";
        return 4;
    }
    std::cerr << "check suite '" << suite << "' passed\n";
    return 0;
}

int cmd_gen_env(const std::string& spec_path, const std::string& out_path) {
    trajfb::Mdp mdp = trajfb::generate_env(load_json_file(spec_path));
    std::string text = trajfb::mdp_to_json(mdp).dump(2);
    text += '\n';
    write_text_file(out_path, text);
    std::cerr << "wrote environment with S=" << mdp.S << " A=" << mdp.A << " H=" << mdp.H
              << " to " << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tabular finite-horizon MDP experiments with trajectory feedback"};
    app.require_subcommand(1);

    std::string config_path, out_path, in_path, spec_path;
    std::string suite = "all";
    int threads = 1;

    CLI::App* run = app.add_subcommand("run", "run an experiment and write a regret CSV");
    run->add_option("--config", config_path, "experiment config JSON")->required();
    run->add_option("--out", out_path, "output CSV path");
    run->add_option("--threads", threads, "worker threads for (agent x seed) cells");

    CLI::App* summ = app.add_subcommand("summarize", "aggregate a regret CSV into summary JSON");
    summ->add_option("--in", in_path, "input CSV path")->required();
    summ->add_option("--out", out_path, "output JSON path (stdout if omitted)");

    CLI::App* chk = app.add_subcommand("check", "run a verification suite");
    chk->add_option("--suite", suite, "oracles, lemmas or all")->required();
    chk->add_option("--out", out_path, "report JSON path (stdout if omitted)");

    CLI::App* gen = app.add_subcommand("gen-env", "generate an environment JSON from a spec");
    gen->add_option("--spec", spec_path, "generator spec JSON")->required();
    gen->add_option("--out", out_path, "output MDP JSON path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_path, threads);
        if (summ->parsed()) return cmd_summarize(in_path, out_path);
        if (chk->parsed()) return cmd_check(suite, out_path);
        if (gen->parsed()) return cmd_gen_env(spec_path, out_path);
    } catch (const trajfb::EnumerationTooLarge& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const trajfb::TooLarge& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const trajfb::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const trajfb::InvalidSpec& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const trajfb::EmptyInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const trajfb::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
