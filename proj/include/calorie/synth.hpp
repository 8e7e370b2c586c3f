#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "calorie/session.hpp"

namespace calorie::synth {

struct ScriptStep {
  int activity = 0;
  double duration_s = 60.0;
};

/// A subject plus the hidden individual factor eta: plateaus are scaled by
/// (1 + eta) and motion tempo/amplitude grow with it.
struct SynthSubject {
  Subject subject;
  double eta = 0.0;
};

struct SynthParams {
  int width = 80;
  int height = 64;
  double tau_s = 30.0;
  double rest_met = 1.0;
  double breath_interval_s = 3.0;
  double breath_noise = 0.05;  // multiplicative, standard deviation
  double depth_noise_mm = 3.0;
  double intensity_noise = 2.0;
  double tempo_gain = 0.8;      // tempo factor 1 + tempo_gain * eta
  double amplitude_gain = 1.2;  // amplitude factor 1 + amplitude_gain * eta
};

/// Plateau rate of an activity for a subject, kcal/min.
double plateau_rate(const SynthSubject& subject, int activity);

/// Noise-free ground-truth rate at time t (first-order approach to each
/// plateau, starting from rest).
double ground_truth_rate(const SynthSubject& subject, std::span<const ScriptStep> script, double t,
                         const SynthParams& params = {});

/// Renders a session lazily: frames and analytic flow are pure functions of
/// (seed, frame index). Boxes, labels and breaths are filled eagerly.
Session synth_session(std::uint64_t seed, std::span<const ScriptStep> script, const SynthSubject& subject,
                      const SynthParams& params = {}, std::string id = {});

struct CorpusSpec {
  std::uint64_t seed = 1;
  int subjects = 6;
  int sessions_per_subject = 2;
  int activities_per_script = 6;
  double seconds_per_activity = 60.0;
  double eta_range = 0.25;  // eta ~ U[-range, range]
  double min_weight_kg = 50.0;
  double max_weight_kg = 100.0;
  std::vector<ScriptStep> script;  // used for every session when non-empty
  SynthParams params;
};

std::vector<SynthSubject> corpus_subjects(const CorpusSpec& spec);

/// Per-session scripts: distinct activities drawn without replacement.
std::vector<ScriptStep> corpus_script(const CorpusSpec& spec, int subject_index, int session_index);

std::vector<Session> synth_corpus(const CorpusSpec& spec);

}  // namespace calorie::synth
