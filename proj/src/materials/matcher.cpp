/*
Copyright 2026 The binscene Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "binscene/core/error.hpp"
#include "binscene/materials/materials.hpp"

namespace binscene::materials {
namespace {

std::set<std::string> Tokens(const std::string& label) {
  std::istringstream in(NormalizeLabel(label));
  std::set<std::string> out;
  std::string tok;
  while (in >> tok) out.insert(tok);
  return out;
}

double Cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

// Highest score wins; equal scores go to the smaller name.
template <typename Score>
const MaterialEntry* ArgMax(const MaterialDatabase& db, Score score, double* best_out) {
  const MaterialEntry* best = nullptr;
  double best_score = -INFINITY;
  for (const auto& e : db.entries) {
    const double s = score(e);
    if (best == nullptr || s > best_score || (s == best_score && e.name < best->name)) {
      best = &e;
      best_score = s;
    }
  }
  *best_out = best_score;
  return best;
}

}  // namespace

std::string NormalizeLabel(const std::string& label) {
  std::string out;
  bool space = false;
  for (unsigned char c : label) {
    if (c == '_' || c == '-' || std::isspace(c)) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

double JaccardSimilarity(const std::string& a, const std::string& b) {
  const auto ta = Tokens(a);
  const auto tb = Tokens(b);
  if (ta.empty() && tb.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& t : ta) common += tb.count(t);
  return static_cast<double>(common) / static_cast<double>(ta.size() + tb.size() - common);
}

MatchStrategy ParseMatchStrategy(const std::string& name) {
  if (name == "exact") return MatchStrategy::kExact;
  if (name == "token-overlap") return MatchStrategy::kTokenOverlap;
  if (name == "embedding-cosine") return MatchStrategy::kEmbeddingCosine;
  throw Error(ErrorKind::kUsage, "unknown matcher strategy '" + name + "'");
}

std::optional<MaterialEntry> MatchLabel(const std::string& label,
                                        const MaterialDatabase& db,
                                        MatchStrategy strategy) {
  if (db.entries.empty()) ThrowInvalidInput("material database is empty");
  double score = 0.0;
  switch (strategy) {
    case MatchStrategy::kExact: {
      const std::string query = NormalizeLabel(label);
      const MaterialEntry* hit = nullptr;
      for (const auto& e : db.entries) {
        if (NormalizeLabel(e.name) == query && (hit == nullptr || e.name < hit->name)) {
          hit = &e;
        }
      }
      if (hit != nullptr) return *hit;
      return MatchLabel(label, db, MatchStrategy::kTokenOverlap);
    }
    case MatchStrategy::kTokenOverlap: {
      const auto* best = ArgMax(
          db, [&](const MaterialEntry& e) { return JaccardSimilarity(label, e.name); },
          &score);
      if (score <= 0.0) return std::nullopt;
      return *best;
    }
    case MatchStrategy::kEmbeddingCosine: {
      const auto q = db.embeddings.find(label);
      if (q == db.embeddings.end()) {
        ThrowInvalidInput("no embedding for query label '" + label + "'");
      }
      for (const auto& e : db.entries) {
        if (!db.embeddings.count(e.name)) {
          ThrowInvalidInput("no embedding for material '" + e.name + "'");
        }
      }
      const auto* best = ArgMax(
          db,
          [&](const MaterialEntry& e) { return Cosine(q->second, db.embeddings.at(e.name)); },
          &score);
      return *best;
    }
  }
  return std::nullopt;
}

std::optional<MaterialEntry> ResolveLabel(const std::string& label,
                                          const MaterialDatabase& db,
                                          MatchStrategy first) {
  if (first != MatchStrategy::kEmbeddingCosine) {
    if (auto hit = MatchLabel(label, db, first)) return hit;
  }
  const bool have_embeddings =
      db.embeddings.count(label) &&
      std::all_of(db.entries.begin(), db.entries.end(),
                  [&](const MaterialEntry& e) { return db.embeddings.count(e.name) > 0; });
  if (have_embeddings) return MatchLabel(label, db, MatchStrategy::kEmbeddingCosine);
  if (first == MatchStrategy::kEmbeddingCosine) {
    return MatchLabel(label, db, MatchStrategy::kExact);
  }
  return std::nullopt;
}

}  // namespace binscene::materials
