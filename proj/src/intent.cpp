#include "pedintent/intent.hpp"

#include <algorithm>
#include <array>
#include <iomanip>
#include <sstream>

#include "pedintent/error.hpp"

namespace pedintent {

namespace {

constexpr std::array<IntentVariable, kIntentVariableCount> kAll = {
    IntentVariable::head_orientation, IntentVariable::motion,   IntentVariable::motion_direction,
    IntentVariable::driver_action,    IntentVariable::age,      IntentVariable::gender,
    IntentVariable::lanes,            IntentVariable::location, IntentVariable::signalized,
    IntentVariable::designed,         IntentVariable::weather,  IntentVariable::time_of_day};

constexpr std::string_view kKeys[] = {"head_orientation", "motion",   "motion_direction",
                                      "driver_action",    "age",      "gender",
                                      "lanes",            "location", "signalized",
                                      "designed",         "weather",  "time_of_day"};

constexpr std::string_view kTitles[] = {"Head orientation", "Motion",   "Motion direction",
                                        "Drivers action",   "Age",      "Gender",
                                        "Number of lanes",  "Location", "Signalized",
                                        "Designed",         "Weather",  "Time of day"};

std::size_t idx(IntentVariable v) { return static_cast<std::size_t>(v); }

VariableSpec spec_for(IntentVariable v, const EncodingOptions& o) {
  switch (v) {
    case IntentVariable::driver_action:
      return {v, VariableEncoding::one_hot, 0, o.five_state_driver_action ? 5u : 4u};
    case IntentVariable::age:
      return {v, VariableEncoding::one_hot, 0, token_count<Age>()};
    case IntentVariable::lanes:
      return o.lanes_one_hot ? VariableSpec{v, VariableEncoding::one_hot, 0, 6}
                             : VariableSpec{v, VariableEncoding::numeric, 0, 1};
    case IntentVariable::location:
      return {v, VariableEncoding::one_hot, 0, token_count<Location>()};
    case IntentVariable::weather:
      return {v, VariableEncoding::one_hot, 0, token_count<Weather>()};
    default:
      return {v, VariableEncoding::binary, 0, 1};
  }
}

void put_one_hot(std::vector<double>& out, std::size_t width, std::size_t index, IntentVariable v) {
  if (index >= width) {
    throw DataError("value index " + std::to_string(index) + " outside the " +
                    std::string(variable_key(v)) + " encoding");
  }
  for (std::size_t k = 0; k < width; ++k) out.push_back(k == index ? 1.0 : 0.0);
}

std::vector<IntentVariable> table_order(std::span<const IntentVariable> active) {
  std::vector<IntentVariable> sorted(active.begin(), active.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw UsageError("active variable set contains duplicates");
  }
  return sorted;
}

}  // namespace

std::span<const IntentVariable> all_intent_variables() { return kAll; }
std::string_view variable_key(IntentVariable v) { return kKeys[idx(v)]; }
std::string_view variable_title(IntentVariable v) { return kTitles[idx(v)]; }

IntentVariable parse_intent_variable(std::string_view key) {
  for (std::size_t i = 0; i < kIntentVariableCount; ++i) {
    if (kKeys[i] == key) return kAll[i];
  }
  throw UsageError("unknown intent variable '" + std::string(key) + "'");
}

std::vector<VariableSpec> variable_specs(const EncodingOptions& options) {
  std::vector<VariableSpec> specs;
  std::size_t offset = 0;
  for (auto v : kAll) {
    auto s = spec_for(v, options);
    s.offset = offset;
    offset += s.width;
    specs.push_back(s);
  }
  return specs;
}

IntentSample make_intent_sample(const PedestrianSample& s, std::optional<HeadOrientation> predicted_head,
                                std::optional<Motion> predicted_motion) {
  if (!s.trainable()) throw DataError("sample " + s.id() + " is not an annotated pedestrian");
  if (!s.crossing) throw DataError("sample " + s.id() + " has no crossing label");
  IntentSample out;
  out.id = s.id();
  out.head = predicted_head.value_or(s.behavior->head);
  out.head_source = predicted_head ? Provenance::predicted : Provenance::ground_truth;
  out.motion = predicted_motion.value_or(s.behavior->motion);
  out.motion_source = predicted_motion ? Provenance::predicted : Provenance::ground_truth;
  out.direction = s.behavior->direction;
  out.driver_action = s.behavior->driver_action;
  out.age = s.demographics->age;
  out.gender = s.demographics->gender;
  out.scene = s.scene;
  out.label = *s.crossing;
  return out;
}

std::vector<double> encode(const IntentSample& s, std::span<const IntentVariable> active,
                           const EncodingOptions& options) {
  if (active.empty()) throw UsageError("encoding needs at least one active variable");
  std::vector<double> out;
  for (auto v : table_order(active)) {
    const auto spec = spec_for(v, options);
    switch (v) {
      case IntentVariable::head_orientation:
        out.push_back(s.head == HeadOrientation::looking ? 1.0 : 0.0);
        break;
      case IntentVariable::motion:
        out.push_back(s.motion == Motion::walking ? 1.0 : 0.0);
        break;
      case IntentVariable::motion_direction:
        out.push_back(s.direction == Direction::lateral ? 1.0 : 0.0);
        break;
      case IntentVariable::driver_action:
        put_one_hot(out, spec.width, static_cast<std::size_t>(s.driver_action), v);
        break;
      case IntentVariable::age:
        put_one_hot(out, spec.width, static_cast<std::size_t>(s.age), v);
        break;
      case IntentVariable::gender:
        out.push_back(s.gender == Gender::female ? 1.0 : 0.0);
        break;
      case IntentVariable::lanes:
        if (s.scene.lanes < 1 || s.scene.lanes > 6) {
          throw DataError("lanes value " + std::to_string(s.scene.lanes) + " outside [1,6]");
        }
        if (spec.encoding == VariableEncoding::numeric) {
          out.push_back(static_cast<double>(s.scene.lanes));
        } else {
          put_one_hot(out, spec.width, static_cast<std::size_t>(s.scene.lanes - 1), v);
        }
        break;
      case IntentVariable::location:
        put_one_hot(out, spec.width, static_cast<std::size_t>(s.scene.location), v);
        break;
      case IntentVariable::signalized:
        out.push_back(s.scene.signalized ? 1.0 : 0.0);
        break;
      case IntentVariable::designed:
        out.push_back(s.scene.designed ? 1.0 : 0.0);
        break;
      case IntentVariable::weather:
        put_one_hot(out, spec.width, static_cast<std::size_t>(s.scene.weather), v);
        break;
      case IntentVariable::time_of_day:
        out.push_back(s.scene.time_of_day == TimeOfDay::night ? 1.0 : 0.0);
        break;
    }
  }
  return out;
}

Matrix encode_all(std::span<const IntentSample> samples, std::span<const IntentVariable> active,
                  const EncodingOptions& options) {
  if (samples.empty()) throw DataError("no intent samples to encode");
  const auto first = encode(samples.front(), active, options);
  Matrix X(samples.size(), first.size());
  X.set_row(0, first);
  for (std::size_t i = 1; i < samples.size(); ++i) X.set_row(i, encode(samples[i], active, options));
  return X;
}

namespace {

std::vector<int> intent_labels(std::span<const IntentSample> samples) {
  std::vector<int> y;
  y.reserve(samples.size());
  for (const auto& s : samples) y.push_back(crossing_class(s.label));
  return y;
}

void check_intent_data(std::span<const IntentSample> samples, const FoldPlan& plan) {
  if (samples.size() < 10) throw DataError("intent training needs at least 10 samples");
  if (plan.fold_of.size() != samples.size()) throw DataError("fold plan does not match the sample count");
}

}  // namespace

double intent_cv_error(std::span<const IntentSample> samples, std::span<const IntentVariable> active,
                       const FoldPlan& plan, const IntentOptions& options) {
  check_intent_data(samples, plan);
  const auto y = intent_labels(samples);
  check_binary_labels(y, samples.size());
  const Matrix X = encode_all(samples, active, options.encoding);
  const auto cv = cross_validate(make_trainer(ClassifierKind::svm, options.train), X, y, plan);
  return 100.0 - cv.mean_accuracy;
}

IntentModel train_intent(std::span<const IntentSample> samples, std::span<const IntentVariable> active,
                         const FoldPlan& plan, const IntentOptions& options) {
  check_intent_data(samples, plan);
  const auto y = intent_labels(samples);
  check_binary_labels(y, samples.size());
  IntentModel model;
  model.active = table_order(active);
  model.encoding = options.encoding;
  const Matrix X = encode_all(samples, model.active, options.encoding);
  model.cv = cross_validate(make_trainer(ClassifierKind::svm, options.train), X, y, plan);
  model.cv_error = 100.0 - model.cv.mean_accuracy;
  model.svm = std::make_shared<TrainedModel>(train_classifier(ClassifierKind::svm, X, y, options.train));
  return model;
}

Crossing predict_crossing(const IntentModel& model, const IntentSample& sample,
                          std::span<const IntentVariable> active) {
  if (!model.svm) throw UsageError("intent model is not trained");
  if (table_order(active) != model.active) {
    throw UsageError("active variable set does not match the set the intent model was trained on");
  }
  const auto x = encode(sample, model.active, model.encoding);
  return model.svm->predict(x) == 1 ? Crossing::crossing : Crossing::not_crossing;
}

std::size_t SelectionTrace::best_index() const {
  if (steps.empty()) throw DataError("empty selection trace");
  std::size_t best = 0;
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (steps[i].error_pct < steps[best].error_pct) best = i;
  }
  return best;
}

SelectionTrace forward_select(std::span<const IntentSample> samples,
                              std::span<const IntentVariable> candidates, const FoldPlan& plan,
                              const IntentOptions& options) {
  auto remaining = table_order(candidates);
  if (remaining.size() < 2) throw UsageError("forward selection needs at least 2 candidate variables");
  check_intent_data(samples, plan);

  SelectionTrace trace;
  std::vector<IntentVariable> selected;
  while (!remaining.empty()) {
    SelectionStep step;
    step.step = selected.size() + 1;
    std::size_t best = 0;
    for (std::size_t c = 0; c < remaining.size(); ++c) {
      auto trial = selected;
      trial.push_back(remaining[c]);
      const double err = intent_cv_error(samples, trial, plan, options);
      step.candidates.emplace_back(remaining[c], err);
      if (err < step.candidates[best].second) best = c;
    }
    step.chosen = remaining[best];
    step.error_pct = step.candidates[best].second;
    selected.push_back(step.chosen);
    step.selected = selected;
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

std::string selection_csv(const SelectionTrace& trace) {
  std::ostringstream out;
  out << "step,chosen,selected_set,error_pct\n";
  for (const auto& s : trace.steps) {
    out << s.step << ',' << variable_key(s.chosen) << ',';
    for (std::size_t i = 0; i < s.selected.size(); ++i) out << (i ? ";" : "") << variable_key(s.selected[i]);
    out << ',' << std::fixed << std::setprecision(4) << s.error_pct << '\n';
  }
  return out.str();
}

std::string selection_table(const SelectionTrace& trace) {
  std::ostringstream out;
  const std::size_t best = trace.steps.empty() ? 0 : trace.best_index();
  out << std::left << std::setw(13) << "# variables" << std::setw(70) << "Variable names" << "Error\n";
  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    const auto& s = trace.steps[k];
    std::string names;
    for (std::size_t i = 0; i < s.selected.size(); ++i) {
      if (i) names += ", ";
      names += variable_title(s.selected[i]);
    }
    std::ostringstream err;
    err << std::fixed << std::setprecision(1) << s.error_pct << '%';
    const std::string mark = k == best ? "*" : "";
    // wrap long sets onto continuation lines
    std::size_t pos = 0;
    bool first = true;
    while (pos < names.size() || first) {
      std::size_t take = std::min<std::size_t>(68, names.size() - pos);
      if (pos + take < names.size()) {
        const auto comma = names.rfind(", ", pos + take);
        if (comma != std::string::npos && comma > pos) take = comma + 2 - pos;
      }
      out << std::setw(13) << (first ? std::to_string(s.step) + mark : "") << std::setw(70)
          << names.substr(pos, take) << (first ? err.str() : "") << '\n';
      pos += take;
      first = false;
    }
  }
  return out.str();
}

}  // namespace pedintent
