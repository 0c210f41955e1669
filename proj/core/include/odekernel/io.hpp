#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "odekernel/models.hpp"
#include "odekernel/optimize.hpp"
#include "odekernel/trajectory.hpp"

namespace odekernel {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

// ---- trajectory CSV: header "t,u1,...,uN", one row per sample ----

std::string trajectory_to_csv(const Trajectory& trajectory);
Trajectory trajectory_from_csv(std::string_view text);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

// ---- error-curve CSV: header "t,eps" ----

void write_error_csv(const std::filesystem::path& path, std::span<const double> times,
                     std::span<const double> eps);

// ---- model JSON: {kind, dims, order, params} ----
// params is the flat parameter array in each model's documented block
// order; finite doubles round-trip bit-exactly.

std::string model_to_json(const Model& model);
std::unique_ptr<Model> model_from_json(std::string_view text);
void save_model(const std::filesystem::path& path, const Model& model);
std::unique_ptr<Model> load_model(const std::filesystem::path& path);

// ---- training report JSON ----
// {final_loss, loss_history, phases, seed, wall_ms}; the history is
// decimated to at most `max_history_points`.

std::string report_to_json(const TrainingReport& report, std::size_t max_history_points = 10000);

// ---- misc ----

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace odekernel
