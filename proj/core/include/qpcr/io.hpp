#pragma once

// Flat-file formats. Numeric CSV fields carry 17 significant digits so every
// double round-trips exactly.
//
//   trajectory CSV   # v=<v>,K=<K>,z0=<z0>,seed=<seed>[,replicate=<r>][,m=<m>]
//                    cycle,count,density
//   ensemble CSV     # v=<v>,z=<z>,n_gen=<n>,count=<count>
//                    one W sample per line
//   density CSV      grid,value
//   h-curves CSV     v,x,H,diagonal
//   JSON             EstimateReport, ScenarioSpec, ExperimentResult

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpcr/experiments.hpp"
#include "qpcr/inference.hpp"
#include "qpcr/simulation.hpp"
#include "qpcr/w_limit.hpp"

namespace qpcr {

std::string format_double(double x);

struct TrajectoryFile {
  Trajectory trajectory;
  std::int64_t z0 = 1;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
};

void write_trajectory_csv(const std::filesystem::path& path,
                          const Trajectory& traj, std::uint64_t seed,
                          std::uint64_t replicate = 0);
TrajectoryFile read_trajectory_csv(const std::filesystem::path& path);

void write_ensemble_csv(const std::filesystem::path& path,
                        const WEnsemble& ens);
WEnsemble read_ensemble_csv(const std::filesystem::path& path);

void write_density_csv(const std::filesystem::path& path,
                       const DensityEstimate& est);
DensityEstimate read_density_csv(const std::filesystem::path& path);

void write_h_curves_csv(const std::filesystem::path& path,
                        const std::vector<CurvePoint>& points);
std::vector<CurvePoint> read_h_curves_csv(const std::filesystem::path& path);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

void to_json(nlohmann::json& j, const Precision& p);
void from_json(const nlohmann::json& j, Precision& p);
void to_json(nlohmann::json& j, const EstimateSettings& s);
void from_json(const nlohmann::json& j, EstimateSettings& s);
void to_json(nlohmann::json& j, const EstimateReport& r);
void from_json(const nlohmann::json& j, EstimateReport& r);
void to_json(nlohmann::json& j, const Observation& o);
void from_json(const nlohmann::json& j, Observation& o);
void to_json(nlohmann::json& j, const ScenarioSpec& s);
// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, ScenarioSpec& s);
void to_json(nlohmann::json& j, const ExperimentResult& r);
void from_json(const nlohmann::json& j, ExperimentResult& r);

}  // namespace qpcr
