#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "xlskd/corpus.hpp"

namespace xlskd {

// Template-generated parallel QA corpus over pseudo-languages. Each language
// maps every concept to its own deterministic surface form; person names,
// place names and years are shared across languages, and a fraction of
// common words is left untranslated. Questions ask who/where/when about the
// one sentence in the context that carries a person, a place and a date.
struct SyntheticSpec {
  std::size_t num_seeds = 200;
  std::vector<LangCode> languages = {"en", "de", "es"};
  std::uint64_t seed = 0;
  std::size_t min_filler_sentences = 3;
  std::size_t max_filler_sentences = 5;
  // Probability that a non-first language reuses the first language's word.
  double untranslated_rate = 0.15;
  // Seed ids are prefix + index, so train and dev corpora never collide.
  std::string id_prefix = "s";
};

ParallelCorpus generate_synthetic(const SyntheticSpec& spec);

}  // namespace xlskd
