#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "biclkt/dataio.hpp"
#include "biclkt/errors.hpp"

namespace biclkt {

namespace {

std::string padded(const char* prefix, int i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width > 12 ? 12 : width, i);
  return buf;
}

double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

}  // namespace

SynthResult generate_synthetic(const SynthConfig& cfg) {
  if (cfg.students < 1 || cfg.concepts < 1 || cfg.exercises < 1 || cfg.seq_len < 1)
    throw ConfigError("synthetic generator extents must be positive");
  if (cfg.exercises < cfg.concepts)
    throw ConfigError("need at least one exercise per concept");

  Rng root(cfg.seed);

  // concept membership: balanced first concept, an extra one for a fraction
  Rng assign = root.fork(1);
  std::vector<std::vector<int>> membership(cfg.exercises);
  for (int e = 0; e < cfg.exercises; ++e) {
    membership[e].push_back(e % cfg.concepts);
    if (cfg.concepts > 1 && assign.bernoulli(cfg.multi_concept_fraction)) {
      int extra = static_cast<int>(assign.below(cfg.concepts - 1));
      if (extra >= membership[e][0]) ++extra;
      membership[e].push_back(extra);
    }
    std::sort(membership[e].begin(), membership[e].end());
  }

  // difficulty group: alternate within each concept's member list
  std::vector<double> delta(cfg.exercises, 0.0);
  {
    std::vector<int> seen(cfg.concepts, 0);
    for (int e = 0; e < cfg.exercises; ++e) {
      const int c0 = membership[e][0];
      delta[e] = (seen[c0]++ % 2 == 0) ? cfg.difficulty : -cfg.difficulty;
    }
  }

  SynthResult res;
  res.mastery.assign(cfg.students, std::vector<double>(cfg.concepts, 0.0));

  const int sw = std::max(3, static_cast<int>(std::to_string(cfg.students - 1).size()));
  const int ew = std::max(3, static_cast<int>(std::to_string(cfg.exercises - 1).size()));
  const int cw = std::max(2, static_cast<int>(std::to_string(cfg.concepts - 1).size()));

  Catalog& cat = res.dataset.catalog;
  for (int s = 0; s < cfg.students; ++s) cat.students.push_back(padded("s", s, sw));
  for (int e = 0; e < cfg.exercises; ++e) cat.exercises.push_back(padded("e", e, ew));
  for (int c = 0; c < cfg.concepts; ++c) cat.concepts.push_back(padded("c", c, cw));
  for (int s = 0; s < cfg.students; ++s) cat.student_index[cat.students[s]] = s;
  for (int e = 0; e < cfg.exercises; ++e) cat.exercise_index[cat.exercises[e]] = e;
  for (int c = 0; c < cfg.concepts; ++c) cat.concept_index[cat.concepts[c]] = c;
  cat.exercise_concepts = membership;
  cat.concept_exercises.assign(cfg.concepts, {});
  for (int e = 0; e < cfg.exercises; ++e)
    for (int c : membership[e]) cat.concept_exercises[c].push_back(e);

  res.dataset.by_student.assign(cfg.students, {});
  for (int s = 0; s < cfg.students; ++s) {
    // per-student stream keyed by student index: schedule independent
    Rng rng = root.fork(2, static_cast<uint64_t>(s));
    std::vector<double>& m = res.mastery[s];
    for (int c = 0; c < cfg.concepts; ++c)
      m[c] = rng.uniform(cfg.init_mastery_lo, cfg.init_mastery_hi);

    for (int t = 0; t < cfg.seq_len; ++t) {
      const int e = static_cast<int>(rng.below(cfg.exercises));
      double base = 0.0;
      for (int c : membership[e]) base += m[c];
      base /= static_cast<double>(membership[e].size());
      // the distortion vanishes at mastery 0 and 1, so the degenerate
      // generator settings keep their closed-form behavior
      const double m_e = clamp01(base + 2.0 * delta[e] * base * (1.0 - base));
      const double p = m_e * (1.0 - cfg.slip) + (1.0 - m_e) * cfg.guess;
      Interaction it;
      it.student = s;
      it.exercise = e;
      it.concepts = membership[e];
      it.correct = rng.bernoulli(p);
      it.order = t;
      res.dataset.by_student[s].push_back(std::move(it));
      for (int c : membership[e]) m[c] = m[c] + cfg.learn_rate * (1.0 - m[c]);
    }
  }
  return res;
}

void write_mastery_csv(const SynthResult& r, std::ostream& out) {
  out << "student_id,concept_id,final_mastery\n";
  const Catalog& cat = r.dataset.catalog;
  char buf[40];
  for (size_t s = 0; s < r.mastery.size(); ++s)
    for (size_t c = 0; c < r.mastery[s].size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", r.mastery[s][c]);
      out << cat.students[s] << ',' << cat.concepts[c] << ',' << buf << '\n';
    }
}

}  // namespace biclkt
