#include <cstdio>
#include <exception>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "freqfed/config.hpp"
#include "freqfed/federation.hpp"
#include "freqfed/log.hpp"

namespace {

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(std::stod(item));
    }
    return out;
}

std::string output_path(const std::string& dir, const std::string& name) {
    if (dir.empty() || dir == ".") return name;
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / name).string();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Federated-learning poisoning testbed with frequency-domain robust aggregation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir_override;
    std::string format = "csv";
    std::uint64_t seed_override = 0;
    bool seed_given = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "Path to key=value config file")->required();
        cmd->add_option("--out-dir", out_dir_override, "Output directory for report files");
        cmd->add_option("--format", format, "Report format: csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        cmd->add_option("--seed", seed_override, "Override the config's master_seed")
            ->each([&](const std::string&) { seed_given = true; });
    };

    CLI::App* run_cmd = app.add_subcommand("run", "Run one federation and write a round report");
    add_common(run_cmd);

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "Run one federation per axis value and tabulate final MA/BA");
    add_common(sweep_cmd);
    std::string axis_str;
    std::string values_str;
    sweep_cmd->add_option("--axis", axis_str, "Sweep axis: pmr, pdr or iid_rate")
        ->required()
        ->check(CLI::IsMember({"pmr", "pdr", "iid_rate"}));
    sweep_cmd->add_option("--values", values_str, "Comma-separated axis values")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    freqfed::FederationConfig cfg;
    try {
        cfg = freqfed::load_config_file(config_path);
        if (seed_given) cfg.master_seed = seed_override;
        if (!out_dir_override.empty()) cfg.out_dir = out_dir_override;
        cfg.validate();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    }

    try {
        if (run_cmd->parsed()) {
            const auto reports = freqfed::run_federation(cfg);
            const std::string name = format == "json" ? "report.json" : "report.csv";
            const std::string content = format == "json" ? freqfed::report_json(reports)
                                                          : freqfed::report_csv(reports);
            const std::string path = output_path(cfg.out_dir, name);
            freqfed::write_file(path, content);
            std::printf("%s", freqfed::report_csv(reports).c_str());
            std::printf("wrote %s\n", path.c_str());
        } else {
            freqfed::SweepAxis axis = freqfed::SweepAxis::pmr;
            if (axis_str == "pdr") axis = freqfed::SweepAxis::pdr;
            if (axis_str == "iid_rate") axis = freqfed::SweepAxis::iid_rate;
            std::vector<double> values;
            try {
                values = parse_values(values_str);
                if (values.empty()) throw std::invalid_argument("no values");
            } catch (const std::exception&) {
                std::fprintf(stderr, "config error: bad --values list '%s'\n", values_str.c_str());
                return 1;
            }
            const auto rows = freqfed::sweep(cfg, axis, values);
            const std::string name = std::string("sweep_") + freqfed::axis_name(axis) +
                                     (format == "json" ? ".json" : ".csv");
            const std::string content = format == "json" ? freqfed::sweep_json(rows, axis)
                                                          : freqfed::sweep_csv(rows, axis);
            const std::string path = output_path(cfg.out_dir, name);
            freqfed::write_file(path, content);
            std::printf("%s", freqfed::sweep_csv(rows, axis).c_str());
            std::printf("wrote %s\n", path.c_str());
            for (const auto& row : rows) {
                if (row.failed) {
                    std::fprintf(stderr, "sweep value %g failed: %s\n", row.value, row.error.c_str());
                    return 2;
                }
            }
        }
    } catch (const freqfed::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return 2;
    }
    return 0;
}
