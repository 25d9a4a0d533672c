#pragma once

#include "rbfpide/bench.hpp"
#include "rbfpide/models.hpp"
#include "rbfpide/stepper.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace rbfpide::config {

struct OutputConfig {
    std::string format = "csv";
    std::optional<std::string> path;
};

/// One run of the CLI: market model, contract, numerics and output choice.
struct RunConfig {
    models::JumpModel model;
    stepper::ContractSpec contract;
    stepper::NumericsConfig numerics;
    /// Spots to report prices at; defaults to the strike.
    std::vector<double> spots;
    OutputConfig output;
    std::size_t greek_points = bench::kDefaultEvalCount;
};

/// Parse errors raise Error(Config) with the dotted path of the field,
/// e.g. "model.sigma: expected a number".
nlohmann::json read_json_file(const std::string& path);

models::JumpModel parse_model(const nlohmann::json& j, const std::string& where = "model");
stepper::ContractSpec parse_contract(const nlohmann::json& j, const std::string& where = "contract");
stepper::NumericsConfig parse_numerics(const nlohmann::json& j, stepper::NumericsConfig base = {},
                                       const std::string& where = "numerics");

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

nlohmann::json model_to_json(const models::JumpModel& model);
nlohmann::json contract_to_json(const stepper::ContractSpec& contract);
nlohmann::json numerics_to_json(const stepper::NumericsConfig& numerics);

bench::ExperimentDescriptor parse_descriptor(const nlohmann::json& j);
nlohmann::json descriptor_to_json(const bench::ExperimentDescriptor& descriptor);

/// Accepts a path to a JSON file or the bare name of a file in `tables_dir`.
/// Unknown names raise Error(Config).
bench::ExperimentDescriptor load_descriptor(const std::string& name_or_path,
                                            const std::string& tables_dir);

std::vector<std::string> list_descriptors(const std::string& tables_dir);

}  // namespace rbfpide::config
