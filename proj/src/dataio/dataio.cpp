#include "biclkt/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "biclkt/errors.hpp"
#include "biclkt/kv.hpp"

namespace biclkt {

namespace {

// RFC4180-style line split: quoted fields may hold delimiters and doubled
// quotes. Embedded newlines are not supported; interaction logs don't use
// them.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c == '\r') {
      // tolerate CRLF
    } else {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

bool parse_long(const std::string& s, long long& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  // real logs carry order as integers, sometimes as "123.0"
  double d = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno != 0) return false;
  if (d != std::floor(d) || std::fabs(d) > 9e15) return false;
  out = static_cast<long long>(d);
  return true;
}

struct RawRow {
  std::string student, exercise;
  std::vector<std::string> concepts;
  bool correct;
  long long order;
  size_t file_pos;
};

}  // namespace

FormatSpec FormatSpec::from_stream(std::istream& in) {
  FormatSpec f;
  auto kv = parse_kv(in);
  for (const auto& [k, v] : kv) {
    if (k == "col_student") f.col_student = v;
    else if (k == "col_exercise") f.col_exercise = v;
    else if (k == "col_concepts") f.col_concepts = v;
    else if (k == "col_correct") f.col_correct = v;
    else if (k == "col_order") f.col_order = v;
    else if (k == "concept_delim") f.concept_delim = v;
    else if (k == "correct_true") f.correct_true = v;
    else if (k == "correct_false") f.correct_false = v;
    else throw ConfigError("unknown format key: " + k);
  }
  if (f.concept_delim.size() != 1) throw ConfigError("concept_delim must be one character");
  return f;
}

Dataset parse_log(std::istream& in, const FormatSpec& fmt) {
  std::string header_line;
  if (!std::getline(in, header_line)) throw DataError("empty interaction log");
  std::vector<std::string> header = split_csv_line(header_line);

  auto col_of = [&](const std::string& name) {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw ConfigError("interaction log is missing column '" + name + "'");
  };
  const int ci_student = col_of(fmt.col_student);
  const int ci_exercise = col_of(fmt.col_exercise);
  const int ci_concepts = col_of(fmt.col_concepts);
  const int ci_correct = col_of(fmt.col_correct);
  const int ci_order = col_of(fmt.col_order);
  const int need = std::max({ci_student, ci_exercise, ci_concepts, ci_correct, ci_order}) + 1;

  std::vector<RawRow> rows;
  size_t skipped = 0;
  std::string line;
  size_t pos = 0;
  while (std::getline(in, line)) {
    ++pos;
    if (kv_trim(line).empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (static_cast<int>(f.size()) < need) {
      ++skipped;
      continue;
    }
    RawRow r;
    r.student = kv_trim(f[ci_student]);
    r.exercise = kv_trim(f[ci_exercise]);
    const std::string correct_s = kv_trim(f[ci_correct]);
    if (r.student.empty() || r.exercise.empty()) {
      ++skipped;
      continue;
    }
    if (correct_s == fmt.correct_true) r.correct = true;
    else if (correct_s == fmt.correct_false) r.correct = false;
    else {
      ++skipped;
      continue;
    }
    if (!parse_long(kv_trim(f[ci_order]), r.order)) {
      ++skipped;
      continue;
    }
    // split the concept field
    const char delim = fmt.concept_delim[0];
    std::string cf = f[ci_concepts];
    std::string piece;
    std::set<std::string> cset;
    std::stringstream cs(cf);
    while (std::getline(cs, piece, delim)) {
      piece = kv_trim(piece);
      if (!piece.empty()) cset.insert(piece);
    }
    if (cset.empty()) {
      ++skipped;
      continue;
    }
    r.concepts.assign(cset.begin(), cset.end());
    r.file_pos = pos;
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw DataError("no valid interaction rows");

  // merge rows that describe the same interaction (same student, exercise,
  // order): multi-concept exercises are often logged once per concept
  std::map<std::tuple<std::string, std::string, long long>, size_t> first_of;
  std::vector<RawRow> merged;
  for (auto& r : rows) {
    auto key = std::make_tuple(r.student, r.exercise, r.order);
    auto it = first_of.find(key);
    if (it == first_of.end()) {
      first_of[key] = merged.size();
      merged.push_back(std::move(r));
    } else {
      RawRow& dst = merged[it->second];
      std::set<std::string> u(dst.concepts.begin(), dst.concepts.end());
      u.insert(r.concepts.begin(), r.concepts.end());
      dst.concepts.assign(u.begin(), u.end());
    }
  }

  Dataset d;
  d.skipped_rows = skipped;
  Catalog& cat = d.catalog;

  std::set<std::string> students, exercises, concepts;
  for (const auto& r : merged) {
    students.insert(r.student);
    exercises.insert(r.exercise);
    for (const auto& c : r.concepts) concepts.insert(c);
  }
  cat.students.assign(students.begin(), students.end());
  cat.exercises.assign(exercises.begin(), exercises.end());
  cat.concepts.assign(concepts.begin(), concepts.end());
  for (size_t i = 0; i < cat.students.size(); ++i) cat.student_index[cat.students[i]] = static_cast<int>(i);
  for (size_t i = 0; i < cat.exercises.size(); ++i) cat.exercise_index[cat.exercises[i]] = static_cast<int>(i);
  for (size_t i = 0; i < cat.concepts.size(); ++i) cat.concept_index[cat.concepts[i]] = static_cast<int>(i);

  cat.exercise_concepts.assign(cat.exercises.size(), {});
  d.by_student.assign(cat.students.size(), {});

  // stable order: file order breaks ties in the raw order column
  std::stable_sort(merged.begin(), merged.end(), [](const RawRow& a, const RawRow& b) {
    if (a.student != b.student) return a.student < b.student;
    if (a.order != b.order) return a.order < b.order;
    return a.file_pos < b.file_pos;
  });

  for (const auto& r : merged) {
    Interaction it;
    it.student = cat.student_index[r.student];
    it.exercise = cat.exercise_index[r.exercise];
    it.correct = r.correct;
    for (const auto& c : r.concepts) it.concepts.push_back(cat.concept_index[c]);
    std::sort(it.concepts.begin(), it.concepts.end());
    it.order = static_cast<int>(d.by_student[it.student].size());
    // exercise -> concept membership is the union over the whole log
    auto& ec = cat.exercise_concepts[it.exercise];
    for (int c : it.concepts)
      if (!std::binary_search(ec.begin(), ec.end(), c)) {
        ec.push_back(c);
        std::sort(ec.begin(), ec.end());
      }
    d.by_student[it.student].push_back(std::move(it));
  }

  cat.concept_exercises.assign(cat.concepts.size(), {});
  for (int e = 0; e < cat.n_exercises(); ++e)
    for (int c : cat.exercise_concepts[e]) cat.concept_exercises[c].push_back(e);
  for (auto& v : cat.concept_exercises) std::sort(v.begin(), v.end());

  return d;
}

void serialize_log(const Dataset& d, std::ostream& out) {
  out << "student_id,exercise_id,concept_ids,correct,order\n";
  const Catalog& cat = d.catalog;
  for (size_t s = 0; s < d.by_student.size(); ++s) {
    for (const Interaction& it : d.by_student[s]) {
      std::string joined;
      for (size_t i = 0; i < it.concepts.size(); ++i) {
        if (i) joined += ';';
        joined += cat.concepts[it.concepts[i]];
      }
      out << csv_escape(cat.students[s]) << ',' << csv_escape(cat.exercises[it.exercise]) << ','
          << csv_escape(joined) << ',' << (it.correct ? 1 : 0) << ',' << it.order << '\n';
    }
  }
}

StudentSplit split_students(const Dataset& d, const SplitSpec& spec) {
  const int n = d.catalog.n_students();
  if (n == 0) throw DataError("split of empty dataset");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw DataError("train fraction must lie strictly between 0 and 1");
  const long long k = std::llround(spec.train_fraction * n);
  if (k <= 0 || k >= n)
    throw DataError("split leaves an empty side: " + std::to_string(k) + " of " +
                    std::to_string(n) + " students in train");
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng rng = Rng(spec.seed).fork(0x5917ull);  // split stream tag
  rng.shuffle(order);
  StudentSplit sp;
  sp.train.assign(order.begin(), order.begin() + k);
  sp.test.assign(order.begin() + k, order.end());
  std::sort(sp.train.begin(), sp.train.end());
  std::sort(sp.test.begin(), sp.test.end());
  return sp;
}

std::vector<Sequence> to_sequences(const Dataset& d, const std::vector<int>& students,
                                   int max_len) {
  if (max_len < 2) throw DataError("sequence length cap must be at least 2");
  std::vector<Sequence> out;
  for (int s : students) {
    const auto& inter = d.by_student.at(s);
    size_t i = 0;
    while (i < inter.size()) {
      Sequence seq;
      seq.student = s;
      const size_t end = std::min(inter.size(), i + static_cast<size_t>(max_len));
      for (; i < end; ++i) {
        seq.exercises.push_back(inter[i].exercise);
        seq.correct.push_back(inter[i].correct ? 1 : 0);
      }
      out.push_back(std::move(seq));
    }
  }
  return out;
}

}  // namespace biclkt
