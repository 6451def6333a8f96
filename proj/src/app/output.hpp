#pragma once

// Run artifacts: flashes.csv, summary.json and a space-time scatter.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace flashsim::app {

struct FlashRecord {
  std::size_t trajectory = 0;
  int type = 1;        // 1-based
  std::size_t k = 1;   // 1-based index within the type's sequence
  double t = 0;
  std::vector<double> x;
};

/// Stable order: trajectory, then time, then type.
void sort_records(std::vector<FlashRecord>& records);

/// %.17g, so values round-trip exactly.
std::string format_double(double v);

/// Header `trajectory,type,k,t,x` (x1..xd for d > 1).
std::string flashes_csv(const std::vector<FlashRecord>& records, int space_dim);

struct FigureStyle {
  int width = 640;
  int height = 640;
  double radius = 1.6;
  std::string title;
};

/// Space-time scatter of the first coordinate against time (time up), one
/// dot per flash, coloured by type. No records gives labelled axes only.
std::string flashes_svg(const std::vector<FlashRecord>& records, const FigureStyle& style = {});

void write_text(const std::filesystem::path& path, const std::string& text);
void write_run(const std::filesystem::path& dir, const std::vector<FlashRecord>& records, int space_dim,
               const nlohmann::json& summary, const FigureStyle& style = {});

}  // namespace flashsim::app
