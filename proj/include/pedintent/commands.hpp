#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pedintent/config.hpp"
#include "pedintent/evalkit.hpp"
#include "pedintent/feature_file.hpp"
#include "pedintent/intent.hpp"

namespace pedintent {

// Output layout under RunConfig::out:
//   annotations.tsv, images/            fixture
//   features/<task>_<feature>.bin       extract (hog, lbp)
//   crops/<task>/, features/<task>_manifest.tsv   extract (cnn)
//   reports/<task>_<feature>_<classifier>_<split>.{csv,txt}, reports/table_<split>.txt
//   predictions/<task>_<feature>_<classifier>_<split>.csv
//   selection/trace.{csv,txt}, selection/intent_summary.txt
//   reports/summary.txt                 report

std::filesystem::path feature_file_path(const std::filesystem::path& out, Task task, FeatureSource feature);
std::filesystem::path manifest_path(const std::filesystem::path& out, Task task);
std::string run_name(Task task, FeatureSource feature, ClassifierKind classifier, SplitMethod split);
std::filesystem::path predictions_path(const std::filesystem::path& out, Task task, FeatureSource feature,
                                       ClassifierKind classifier, SplitMethod split);

void cmd_fixture(const RunConfig& config, std::ostream& log);
void cmd_extract(const RunConfig& config, std::ostream& log);
std::vector<EvalReport> cmd_train_eval(const RunConfig& config, std::ostream& log);
SelectionTrace cmd_select(const RunConfig& config, std::ostream& log);
std::string cmd_report(const RunConfig& config, std::ostream& log);

/// Text form of a feature file: a `dimension<TAB>N` line, then one line per
/// record with the id and shortest round-trip float values, tab-separated.
std::string dump_feature_file(const FeatureFile& file);
FeatureFile parse_feature_dump(std::string_view text, std::string_view source = "<memory>");

std::vector<EvalReport> read_report_csv(const std::filesystem::path& path);

/// Full command-line front end; returns the process exit code
/// (0 ok, 1 usage, 2 data, 3 numerical).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pedintent
