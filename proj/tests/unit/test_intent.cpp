#include <doctest.h>

#include <functional>
#include <map>
#include <random>
#include <set>

#include "pedintent/error.hpp"
#include "pedintent/intent.hpp"
#include "support/corpus.hpp"

using namespace pedintent;

namespace {

using Rule = std::function<bool(const IntentSample&)>;

// Random intent samples; the crossing label follows `rule`.
std::vector<IntentSample> synthetic(std::size_t n, std::uint64_t seed, const Rule& rule) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t k) { return static_cast<std::size_t>(rng() % k); };
  std::vector<IntentSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    IntentSample s;
    s.id = "s" + std::to_string(i);
    s.head = static_cast<HeadOrientation>(pick(2));
    s.motion = static_cast<Motion>(pick(2));
    s.direction = static_cast<Direction>(pick(2));
    s.driver_action = static_cast<DriverAction>(pick(4));
    s.age = static_cast<Age>(pick(4));
    s.gender = static_cast<Gender>(pick(2));
    s.scene.lanes = 1 + static_cast<int>(pick(6));
    s.scene.location = static_cast<Location>(pick(3));
    s.scene.signalized = pick(2);
    s.scene.designed = pick(2);
    s.scene.weather = static_cast<Weather>(pick(4));
    s.scene.time_of_day = static_cast<TimeOfDay>(pick(2));
    s.label = rule(s) ? Crossing::crossing : Crossing::not_crossing;
    out.push_back(s);
  }
  return out;
}

// CV error recomputed from the public building blocks.
double error_oracle(std::span<const IntentSample> samples, std::vector<IntentVariable> active, const FoldPlan& plan) {
  const auto X = encode_all(samples, active);
  std::vector<int> y;
  for (const auto& s : samples) y.push_back(crossing_class(s.label));
  const auto cv = cross_validate(make_trainer(ClassifierKind::svm), X, y, plan);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < y.size(); ++i) wrong += cv.held_out_predictions[i] != y[i];
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(y.size());
}

const auto kMotion = IntentVariable::motion;
const auto kDesigned = IntentVariable::designed;

}  // namespace

TEST_CASE("encoding widths") {
  IntentSample s;
  const auto all = all_intent_variables();
  CHECK(all.size() == 12);
  CHECK(encode(s, all).size() == 23);
  CHECK(encode(s, all, {true, false}).size() == 24);
  CHECK(encode(s, all, {false, true}).size() == 28);
  const std::vector<IntentVariable> only_motion = {kMotion};
  CHECK(encode(s, only_motion).size() == 1);

  for (const auto& options : {EncodingOptions{}, EncodingOptions{true, true}}) {
    const auto specs = variable_specs(options);
    REQUIRE(specs.size() == 12);
    std::size_t next = 0;
    for (std::size_t i = 0; i < 12; ++i) {
      CHECK(specs[i].variable == all[i]);
      CHECK(specs[i].offset == next);
      next += specs[i].width;
    }
    CHECK(next == encode(s, all, options).size());
  }
}

TEST_CASE("one-hot columns follow token order") {
  IntentSample s;
  s.scene.weather = Weather::rain;
  const std::vector<IntentVariable> weather = {IntentVariable::weather};
  CHECK(encode(s, weather) == std::vector<double>{0, 0, 1, 0});

  // full vector: weather sits at its VariableSpec offset
  const auto specs = variable_specs();
  const auto full = encode(s, all_intent_variables());
  const auto& ws = specs[static_cast<std::size_t>(IntentVariable::weather)];
  CHECK(std::vector<double>(full.begin() + ws.offset, full.begin() + ws.offset + 4) == std::vector<double>{0, 0, 1, 0});

  s.scene.lanes = 4;
  const std::vector<IntentVariable> lanes = {IntentVariable::lanes};
  CHECK(encode(s, lanes) == std::vector<double>{4});
  CHECK(encode(s, lanes, {false, true}) == std::vector<double>{0, 0, 0, 1, 0, 0});
}

TEST_CASE("active variables are concatenated in table order") {
  IntentSample s;
  s.motion = Motion::walking;
  s.scene.designed = true;
  s.scene.weather = Weather::snow;
  const std::vector<IntentVariable> shuffled = {IntentVariable::weather, kDesigned, kMotion};
  const std::vector<IntentVariable> ordered = {kMotion, kDesigned, IntentVariable::weather};
  CHECK(encode(s, shuffled) == encode(s, ordered));
  CHECK(encode(s, ordered) == std::vector<double>{1, 1, 0, 0, 0, 1});
}

TEST_CASE("encoding errors") {
  IntentSample s;
  CHECK_THROWS_AS(encode(s, std::vector<IntentVariable>{}), UsageError);
  CHECK_THROWS_AS(encode(s, std::vector<IntentVariable>{kMotion, kMotion}), UsageError);
  s.driver_action = DriverAction::stopped;
  const std::vector<IntentVariable> driver = {IntentVariable::driver_action};
  CHECK_THROWS_AS(encode(s, driver), DataError);
  CHECK(encode(s, driver, {true, false}) == std::vector<double>{0, 0, 0, 0, 1});
  s.scene.lanes = 9;
  CHECK_THROWS_AS(encode(s, std::vector<IntentVariable>{IntentVariable::lanes}), DataError);
}

TEST_CASE("property: every variable encodes distinct values distinctly") {
  const auto samples = synthetic(400, 1, [](const IntentSample&) { return true; });
  for (auto v : all_intent_variables()) {
    const std::vector<IntentVariable> one = {v};
    std::map<std::vector<double>, std::string> seen;
    for (const auto& s : samples) {
      const auto code = encode(s, one);
      // the variable's own value, as text
      std::string value;
      switch (v) {
        case IntentVariable::head_orientation: value = to_token(s.head); break;
        case IntentVariable::motion: value = to_token(s.motion); break;
        case IntentVariable::motion_direction: value = to_token(s.direction); break;
        case IntentVariable::driver_action: value = to_token(s.driver_action); break;
        case IntentVariable::age: value = to_token(s.age); break;
        case IntentVariable::gender: value = to_token(s.gender); break;
        case IntentVariable::lanes: value = std::to_string(s.scene.lanes); break;
        case IntentVariable::location: value = to_token(s.scene.location); break;
        case IntentVariable::signalized: value = s.scene.signalized ? "t" : "f"; break;
        case IntentVariable::designed: value = s.scene.designed ? "t" : "f"; break;
        case IntentVariable::weather: value = to_token(s.scene.weather); break;
        case IntentVariable::time_of_day: value = to_token(s.scene.time_of_day); break;
      }
      auto [it, inserted] = seen.emplace(code, value);
      CHECK(it->second == value);
    }
    std::set<std::string> values;
    for (const auto& [code, value] : seen) values.insert(value);
    CHECK(values.size() == seen.size());
  }
}

TEST_CASE("variable names") {
  CHECK(variable_key(IntentVariable::time_of_day) == "time_of_day");
  CHECK(parse_intent_variable("designed") == kDesigned);
  CHECK_THROWS_AS(parse_intent_variable("speed"), UsageError);
}

TEST_CASE("intent samples record provenance") {
  auto p = testsupport::make_sample("c", 0);
  p.behavior->head = HeadOrientation::not_looking;
  p.crossing = Crossing::crossing;
  const auto truth = make_intent_sample(p, std::nullopt, std::nullopt);
  CHECK(truth.head == HeadOrientation::not_looking);
  CHECK(truth.head_source == Provenance::ground_truth);
  const auto predicted = make_intent_sample(p, HeadOrientation::looking, Motion::standing);
  CHECK(predicted.head == HeadOrientation::looking);
  CHECK(predicted.head_source == Provenance::predicted);
  CHECK(predicted.motion == Motion::standing);
  CHECK(predicted.motion_source == Provenance::predicted);
  CHECK(predicted.label == Crossing::crossing);
  p.crossing.reset();
  CHECK_THROWS_AS(make_intent_sample(p, std::nullopt, std::nullopt), DataError);
}

TEST_CASE("planted XOR rule is learned from its two variables") {
  const auto samples = synthetic(200, 3, [](const IntentSample& s) {
    return (s.motion == Motion::walking) != s.scene.designed;
  });
  const auto plan = kfold(samples.size(), 5, 1);
  const std::vector<IntentVariable> pair = {kMotion, kDesigned};
  CHECK(intent_cv_error(samples, pair, plan) <= 2.0);
  CHECK(intent_cv_error(samples, pair, plan) == error_oracle(samples, pair, plan));
}

TEST_CASE("an uncorrelated variable scores near chance") {
  const auto samples = synthetic(200, 4, [](const IntentSample& s) {
    return (s.motion == Motion::walking) != s.scene.designed;
  });
  const auto plan = kfold(samples.size(), 5, 2);
  const double err = intent_cv_error(samples, std::vector<IntentVariable>{IntentVariable::gender}, plan);
  CHECK(err >= 40.0);
  CHECK(err <= 60.0);
  CHECK_THROWS_AS(intent_cv_error(std::span(samples).first(9), std::vector<IntentVariable>{kMotion}, kfold(9, 5, 1)),
                  DataError);
}

TEST_CASE("predict_crossing") {
  const auto samples = synthetic(100, 5, [](const IntentSample& s) { return s.motion == Motion::walking; });
  const std::vector<IntentVariable> active = {kMotion};
  const auto model = train_intent(samples, active, kfold(100, 5, 3));
  CHECK(model.cv_error == 0.0);
  IntentSample walker;
  walker.motion = Motion::walking;
  CHECK(predict_crossing(model, walker, active) == Crossing::crossing);
  CHECK(predict_crossing(model, walker, active) == Crossing::crossing);
  IntentSample stander;
  stander.motion = Motion::standing;
  CHECK(predict_crossing(model, stander, active) == Crossing::not_crossing);
  CHECK_THROWS_AS(predict_crossing(model, walker, std::vector<IntentVariable>{kMotion, kDesigned}), UsageError);
}

TEST_CASE("forward selection picks a perfectly predictive variable first") {
  const auto samples = synthetic(150, 6, [](const IntentSample& s) { return s.scene.signalized; });
  const auto plan = kfold(samples.size(), 5, 4);
  const auto trace = forward_select(samples, all_intent_variables(), plan);
  REQUIRE(trace.steps.size() == 12);
  CHECK(trace.steps[0].chosen == IntentVariable::signalized);
  CHECK(trace.steps[0].error_pct == 0.0);

  // brute force over the single-variable models, ties to table order
  double best = 101.0;
  IntentVariable best_v{};
  for (auto v : all_intent_variables()) {
    const double e = error_oracle(samples, {v}, plan);
    if (e < best) {
      best = e;
      best_v = v;
    }
  }
  CHECK(best_v == trace.steps[0].chosen);
  CHECK(best == trace.steps[0].error_pct);
}

TEST_CASE("property: selection trace structure") {
  const auto samples = testsupport::fixture_intent_samples(2);
  const auto plan = kfold(samples.size(), 5, 9);
  const auto trace = forward_select(samples, all_intent_variables(), plan);
  REQUIRE(trace.steps.size() == 12);
  for (std::size_t k = 0; k < 12; ++k) {
    const auto& step = trace.steps[k];
    CHECK(step.step == k + 1);
    CHECK(step.selected.size() == k + 1);
    CHECK(step.selected.back() == step.chosen);
    if (k > 0) {
      CHECK(std::equal(trace.steps[k - 1].selected.begin(), trace.steps[k - 1].selected.end(), step.selected.begin()));
    }
    CHECK(step.candidates.size() == 12 - k);
    double lo = 101.0;
    for (const auto& [v, e] : step.candidates) lo = std::min(lo, e);
    CHECK(step.error_pct == lo);
    // tie-break: the first minimiser in table order
    for (const auto& [v, e] : step.candidates) {
      if (e == lo) {
        CHECK(v == step.chosen);
        break;
      }
    }
  }
  const auto again = forward_select(samples, all_intent_variables(), plan);
  CHECK(selection_csv(again) == selection_csv(trace));
  const auto best = trace.best_index();
  for (std::size_t k = 0; k < 12; ++k) {
    CHECK(trace.steps[k].error_pct >= trace.steps[best].error_pct);
    if (k < best) CHECK(trace.steps[k].error_pct > trace.steps[best].error_pct);
  }
  CHECK_THROWS_AS(forward_select(samples, std::vector<IntentVariable>{kMotion}, plan), UsageError);
}

TEST_CASE("fixture's planted rule is recoverable") {
  const auto samples = testsupport::fixture_intent_samples(1);
  const auto plan = kfold(samples.size(), 5, 1);
  const double err = intent_cv_error(samples, std::vector<IntentVariable>{kMotion, kDesigned}, plan);
  CHECK(100.0 - err >= 85.0);
}

TEST_CASE("selection output formats") {
  const auto samples = synthetic(60, 7, [](const IntentSample& s) { return s.motion == Motion::walking; });
  const auto trace = forward_select(samples, std::vector<IntentVariable>{kDesigned, kMotion}, kfold(60, 5, 1));
  const auto csv = selection_csv(trace);
  CHECK(csv.rfind("step,chosen,selected_set,error_pct\n", 0) == 0);
  CHECK(csv.find("1,motion,motion,0") != std::string::npos);
  CHECK(csv.find("2,designed,motion;designed,") != std::string::npos);
  const auto table = selection_table(trace);
  CHECK(table.find("Motion") != std::string::npos);
  CHECK(table.find('*') != std::string::npos);
}
