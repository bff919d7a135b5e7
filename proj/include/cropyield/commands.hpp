#pragma once

#include <functional>
#include <string_view>

#include "cropyield/config.hpp"

namespace cropyield {

/// Progress lines go through this sink (stderr in the CLI, silent in tests).
using LogSink = std::function<void(std::string_view)>;

/// <out>/data/{soil,weather,crop}.csv from cfg.synth and cfg.seed.
void cmd_synth(const RunConfig& cfg, const LogSink& log = {});
/// <out>/clean/{soil,weather,crop}.csv and <out>/rejections.csv.
void cmd_ingest(const RunConfig& cfg, const LogSink& log = {});
/// <out>/features_<mode>.csv per selected mode and <out>/assembly_log.csv.
void cmd_features(const RunConfig& cfg, const LogSink& log = {});
/// <out>/report.csv, <out>/report.txt and <out>/mae_chart.svg.
Report cmd_evaluate(const RunConfig& cfg, const LogSink& log = {});
/// Reads <out>/report.csv; writes <out>/comparison.txt and appends the
/// comparison to <out>/report.txt (replacing an earlier one).
void cmd_compare(const RunConfig& cfg, const LogSink& log = {});

}  // namespace cropyield
