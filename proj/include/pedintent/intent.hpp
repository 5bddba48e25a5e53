#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pedintent/dataset.hpp"
#include "pedintent/evalkit.hpp"
#include "pedintent/learners.hpp"

namespace pedintent {

/// The twelve annotation variables, in the order they are tabulated.
enum class IntentVariable {
  head_orientation,
  motion,
  motion_direction,
  driver_action,
  age,
  gender,
  lanes,
  location,
  signalized,
  designed,
  weather,
  time_of_day,
};

inline constexpr std::size_t kIntentVariableCount = 12;

std::span<const IntentVariable> all_intent_variables();
std::string_view variable_key(IntentVariable v);    // snake_case, used in CSV and flags
std::string_view variable_title(IntentVariable v);  // display name
IntentVariable parse_intent_variable(std::string_view key);

enum class VariableEncoding { binary, one_hot, numeric };

struct EncodingOptions {
  bool five_state_driver_action = false;  // accept "stopped" as a fifth state
  bool lanes_one_hot = false;             // lanes as 6 indicator columns instead of 1..6
};

struct VariableSpec {
  IntentVariable variable;
  VariableEncoding encoding;
  std::size_t offset;  // first column in the full encoding
  std::size_t width;
};

/// Specs for all twelve variables; together they tile the full encoded
/// vector without gaps.
std::vector<VariableSpec> variable_specs(const EncodingOptions& options = {});

enum class Provenance { predicted, ground_truth };

struct IntentSample {
  std::string id;
  HeadOrientation head = HeadOrientation::looking;
  Provenance head_source = Provenance::ground_truth;
  Motion motion = Motion::walking;
  Provenance motion_source = Provenance::ground_truth;
  Direction direction = Direction::lateral;
  DriverAction driver_action = DriverAction::moving_fast;
  Age age = Age::adult;
  Gender gender = Gender::male;
  SceneContext scene;
  Crossing label = Crossing::not_crossing;
};

/// Builds an intent sample from an annotated pedestrian with a crossing
/// label. Head orientation and motion come from the predictions when given
/// and fall back to the annotation otherwise.
IntentSample make_intent_sample(const PedestrianSample& s, std::optional<HeadOrientation> predicted_head,
                                std::optional<Motion> predicted_motion);

inline int crossing_class(Crossing c) { return c == Crossing::crossing ? 1 : 0; }

/// Columns of the active variables, concatenated in table order regardless
/// of the order given.
std::vector<double> encode(const IntentSample& sample, std::span<const IntentVariable> active,
                           const EncodingOptions& options = {});
Matrix encode_all(std::span<const IntentSample> samples, std::span<const IntentVariable> active,
                  const EncodingOptions& options = {});

struct IntentOptions {
  EncodingOptions encoding;
  TrainOptions train;
};

struct IntentModel {
  std::shared_ptr<const TrainedModel> svm;  // trained on all samples
  std::vector<IntentVariable> active;       // table order
  EncodingOptions encoding;
  double cv_error = 0.0;                    // percent
  CvResult cv;
};

/// Cross-validated error (percent) of the cubic SVM on the active variables.
double intent_cv_error(std::span<const IntentSample> samples, std::span<const IntentVariable> active,
                       const FoldPlan& plan, const IntentOptions& options = {});

IntentModel train_intent(std::span<const IntentSample> samples, std::span<const IntentVariable> active,
                         const FoldPlan& plan, const IntentOptions& options = {});

/// Fails when `active` differs from the set the model was trained on.
Crossing predict_crossing(const IntentModel& model, const IntentSample& sample,
                          std::span<const IntentVariable> active);

struct SelectionStep {
  std::size_t step = 0;  // 1-based
  IntentVariable chosen{};
  std::vector<IntentVariable> selected;  // in order of selection
  double error_pct = 0.0;
  std::vector<std::pair<IntentVariable, double>> candidates;  // every evaluation at this step
};

struct SelectionTrace {
  std::vector<SelectionStep> steps;

  /// Index into `steps` of the lowest error; ties prefer the smaller set.
  std::size_t best_index() const;
};

/// Greedy forward selection over whole variables. One fold plan is shared
/// by every evaluation; ties go to the variable listed first in table order.
SelectionTrace forward_select(std::span<const IntentSample> samples,
                              std::span<const IntentVariable> candidates, const FoldPlan& plan,
                              const IntentOptions& options = {});

std::string selection_csv(const SelectionTrace& trace);
std::string selection_table(const SelectionTrace& trace);

}  // namespace pedintent
