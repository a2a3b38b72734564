#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "biclkt/rng.hpp"

namespace biclkt {

// One answered exercise. Indices are dense (see Catalog); concepts is the
// full sorted concept set of the exercise, never split per concept.
struct Interaction {
  int student = -1;
  int exercise = -1;
  std::vector<int> concepts;
  bool correct = false;
  int order = -1;  // strictly increasing within a student
};

struct Catalog {
  std::vector<std::string> students;   // dense index -> id, sorted
  std::vector<std::string> exercises;
  std::vector<std::string> concepts;
  std::map<std::string, int> student_index;
  std::map<std::string, int> exercise_index;
  std::map<std::string, int> concept_index;
  std::vector<std::vector<int>> exercise_concepts;  // sorted per exercise
  std::vector<std::vector<int>> concept_exercises;  // sorted per concept

  int n_students() const { return static_cast<int>(students.size()); }
  int n_exercises() const { return static_cast<int>(exercises.size()); }
  int n_concepts() const { return static_cast<int>(concepts.size()); }
};

struct Dataset {
  Catalog catalog;
  std::vector<std::vector<Interaction>> by_student;  // ordered per student
  size_t skipped_rows = 0;

  size_t n_interactions() const {
    size_t n = 0;
    for (const auto& s : by_student) n += s.size();
    return n;
  }
};

// Maps an arbitrary interaction log layout onto the canonical five fields.
// Loaded from a small key=value file; defaults describe the canonical CSV.
struct FormatSpec {
  std::string col_student = "student_id";
  std::string col_exercise = "exercise_id";
  std::string col_concepts = "concept_ids";
  std::string col_correct = "correct";
  std::string col_order = "order";
  std::string concept_delim = ";";
  std::string correct_true = "1";
  std::string correct_false = "0";

  static FormatSpec from_stream(std::istream& in);
};

// Parses a header-first CSV (quoted fields supported). Malformed rows are
// counted and skipped; a missing mapped column raises ConfigError; zero
// valid rows raises DataError. Rows that share (student, exercise, order)
// are merged into one interaction with the union of their concept sets.
Dataset parse_log(std::istream& in, const FormatSpec& fmt = FormatSpec{});

// Canonical form: student_id,exercise_id,concept_ids,correct,order with
// ';'-joined sorted concepts and sequential order. parse(serialize(d)) == d.
void serialize_log(const Dataset& d, std::ostream& out);

// Disjoint by-student split. Sizes are llround(n * fraction); an empty side
// raises DataError. Student order inside each side is ascending.
struct SplitSpec {
  double train_fraction = 0.8;
  uint64_t seed = 1;
};
struct StudentSplit {
  std::vector<int> train;
  std::vector<int> test;
};
StudentSplit split_students(const Dataset& d, const SplitSpec& spec);

// Per-student answer sequences for the prediction heads. Students with more
// than max_len interactions continue in fresh follow-on sequences.
struct Sequence {
  int student = -1;
  std::vector<int> exercises;
  std::vector<int> correct;  // 0/1
};
std::vector<Sequence> to_sequences(const Dataset& d, const std::vector<int>& students,
                                   int max_len = 200);

// ---- synthetic interaction logs with planted structure ----

struct SynthConfig {
  int students = 200;
  int concepts = 12;
  int exercises = 60;
  int seq_len = 50;
  double guess = 0.2;
  double slip = 0.1;
  double learn_rate = 0.15;
  double init_mastery_lo = 0.05;
  double init_mastery_hi = 0.30;
  // exercises in a concept split into two groups whose effective mastery is
  // distorted by +-difficulty; this plants within-concept co-correctness
  double difficulty = 0.4;
  double multi_concept_fraction = 0.2;
  uint64_t seed = 1;
};

struct SynthResult {
  Dataset dataset;
  // final per-student per-concept mastery, ground truth for inspection
  std::vector<std::vector<double>> mastery;
};

// Mastery-based generator: per-concept mastery rises with practice by
// learn_rate; P(correct) = m_e*(1-slip) + (1-m_e)*guess where m_e distorts
// mastery by the exercise's difficulty group. Bit-reproducible per seed.
SynthResult generate_synthetic(const SynthConfig& cfg);

void write_mastery_csv(const SynthResult& r, std::ostream& out);

}  // namespace biclkt
