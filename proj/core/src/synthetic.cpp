#include "xlskd/synthetic.hpp"

#include <array>
#include <map>
#include <set>
#include <stdexcept>

#include "xlskd/rng.hpp"
#include "xlskd/utf8.hpp"

namespace xlskd {
namespace {

enum class Kind { kQuestionWord, kVerb, kNoun, kFunction, kPlaceKind, kMonth };

constexpr std::size_t kNumVerbs = 16;
constexpr std::size_t kNumNouns = 40;
constexpr std::size_t kNumFunction = 10;
constexpr std::size_t kNumPlaceKinds = 8;
constexpr std::size_t kNumNames = 30;

// Function-word slots used by the templates.
constexpr std::size_t kFnIn = 0;
constexpr std::size_t kFnOn = 1;
constexpr std::size_t kFnThe = 2;

enum class Script { kLatin, kArabic, kDevanagari, kCyrillic, kCjk };

struct Profile {
  Script script = Script::kLatin;
  std::vector<std::u32string> onsets;
  std::vector<std::u32string> nuclei;
  std::u32string period = U".";
  std::u32string question_mark = U"?";
};

std::vector<std::u32string> split(std::u32string_view s) {
  std::vector<std::u32string> out;
  std::u32string cur;
  for (char32_t c : s) {
    if (c == U' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

Profile profile_for(const LangCode& lang) {
  Profile p;
  if (lang == "zh" || lang == "ja") {
    p.script = Script::kCjk;
    p.period = U"。";
    p.question_mark = U"？";
  } else if (lang == "ar") {
    p.script = Script::kArabic;
    p.onsets = split(U"ب ت ج ح د ر س ش ع ف ق ك ل م ن ه و");
    p.nuclei = split(U"ا ي و ى");
    p.question_mark = U"؟";
  } else if (lang == "hi") {
    p.script = Script::kDevanagari;
    p.onsets = split(U"क ग च ज त द न प ब म र ल स ह");
    p.nuclei = split(U"ा ि ी ु े ो");
    p.period = U"।";
  } else if (lang == "ru") {
    p.script = Script::kCyrillic;
    p.onsets = split(U"б в г д ж з к л м н п р с т");
    p.nuclei = split(U"а е и о у ы я");
  } else if (lang == "de") {
    p.onsets = split(U"b d f g h k l m n r s t w z sch st");
    p.nuclei = split(U"a e i o u ei au ä ü ie");
  } else if (lang == "es") {
    p.onsets = split(U"b c d f g l m n p r s t v ll ñ");
    p.nuclei = split(U"a e i o u ue io á é");
  } else if (lang == "vi") {
    p.onsets = split(U"b c d đ g h k l m n ph th tr x");
    p.nuclei = split(U"a ă â e ê i o ô ơ u ư ạ ố");
  } else if (lang == "en") {
    p.onsets = split(U"b c d f g h l m n p r s t v w th");
    p.nuclei = split(U"a e i o u ee oo ai");
  } else {
    p.onsets = split(U"b d f g k l m n p r s t v z");
    p.nuclei = split(U"a e i o u y");
  }
  return p;
}

std::uint64_t concept_hash(const LangCode& lang, Kind kind, std::size_t index,
                           std::uint64_t salt) {
  return derive_seed(salt, lang + "/" + std::to_string(static_cast<int>(kind)) + "/" +
                               std::to_string(index));
}

std::u32string make_word(const Profile& p, std::uint64_t h) {
  Rng rng(h);
  std::u32string w;
  if (p.script == Script::kCjk) {
    const std::size_t chars = 1 + rng.below(2);
    for (std::size_t i = 0; i < chars; ++i) w.push_back(static_cast<char32_t>(0x4E00 + rng.below(3000)));
    return w;
  }
  const std::size_t syllables = 2 + rng.below(2);
  for (std::size_t i = 0; i < syllables; ++i) {
    w += p.onsets[rng.below(p.onsets.size())];
    w += p.nuclei[rng.below(p.nuclei.size())];
  }
  return w;
}

std::u32string capitalize(std::u32string w) {
  if (!w.empty() && w[0] >= U'a' && w[0] <= U'z') w[0] -= 32;
  return w;
}

// Surface forms of every translated concept, per language.
class Lexicon {
 public:
  Lexicon(const std::vector<LangCode>& languages, std::uint64_t salt, double untranslated_rate) {
    const LangCode& first = languages.front();
    for (const auto& lang : languages) {
      const Profile profile = profile_for(lang);
      std::set<std::u32string> used;
      auto& table = words_[lang];
      for (auto [kind, count] : std::array<std::pair<Kind, std::size_t>, 6>{
               {{Kind::kQuestionWord, 3},
                {Kind::kVerb, kNumVerbs},
                {Kind::kNoun, kNumNouns},
                {Kind::kFunction, kNumFunction},
                {Kind::kPlaceKind, kNumPlaceKinds},
                {Kind::kMonth, 12}}}) {
        auto& list = table[kind];
        for (std::size_t i = 0; i < count; ++i) {
          const std::uint64_t h = concept_hash(lang, kind, i, salt);
          std::u32string w;
          const bool lazy = lang != first && kind != Kind::kQuestionWord &&
                            Rng(h ^ 0x5bd1e995ULL).uniform() < untranslated_rate;
          if (lazy && used.insert(words_.at(first).at(kind)[i]).second) {
            w = words_.at(first).at(kind)[i];
          } else {
            std::uint64_t attempt = h;
            do {
              w = make_word(profile, attempt++);
            } while (!used.insert(w).second);
          }
          list.push_back(w);
        }
      }
      profiles_[lang] = profile;
    }
  }

  const std::u32string& word(const LangCode& lang, Kind kind, std::size_t i) const {
    return words_.at(lang).at(kind).at(i);
  }
  const Profile& profile(const LangCode& lang) const { return profiles_.at(lang); }

 private:
  std::map<LangCode, std::map<Kind, std::vector<std::u32string>>> words_;
  std::map<LangCode, Profile> profiles_;
};

std::vector<std::u32string> shared_names(std::uint64_t salt, const char* stream) {
  Profile latin = profile_for("xx");
  std::vector<std::u32string> out;
  std::set<std::u32string> used;
  Rng rng(salt, stream);
  while (out.size() < kNumNames) {
    std::u32string w = capitalize(make_word(latin, rng.next_u64()));
    if (used.insert(w).second) out.push_back(w);
  }
  return out;
}

// Seed-level content, identical across languages.
struct SeedPlan {
  std::size_t qtype = 0;  // 0 who, 1 where, 2 when
  std::size_t first = 0, last = 0;
  std::size_t place_kind = 0, place_name = 0;
  std::size_t month = 0, year = 0;
  std::size_t verb = 0, object = 0;
  std::size_t main_position = 0;
  // Each filler sentence: noun, verb, function word, noun.
  std::vector<std::array<std::size_t, 4>> fillers;
};

struct Word {
  std::u32string text;
  bool attach = false;  // glue to the previous word (punctuation)
};

struct Assembled {
  std::u32string text;
  std::size_t answer_begin = 0;
  std::size_t answer_end = 0;
};

bool all_cjk(const std::u32string& w) {
  for (char32_t c : w) {
    if (!utf8::is_cjk(c)) return false;
  }
  return !w.empty();
}

// Joins words with single spaces; CJK words are written without spaces
// between them. Records the character span of words [mark_begin, mark_end).
Assembled assemble(const std::vector<Word>& words, std::size_t mark_begin, std::size_t mark_end) {
  Assembled a;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto& w = words[i];
    if (i > 0 && !w.attach && !(all_cjk(w.text) && all_cjk(words[i - 1].text))) {
      a.text.push_back(U' ');
    }
    if (i == mark_begin) a.answer_begin = a.text.size();
    a.text += w.text;
    if (i + 1 == mark_end) a.answer_end = a.text.size();
  }
  return a;
}

}  // namespace

ParallelCorpus generate_synthetic(const SyntheticSpec& spec) {
  if (spec.languages.empty()) throw std::invalid_argument("synthetic: no languages");
  if (spec.min_filler_sentences > spec.max_filler_sentences) {
    throw std::invalid_argument("synthetic: min_filler_sentences > max_filler_sentences");
  }
  // The lexicon depends only on the language list so train and dev corpora
  // generated with different seeds share vocabulary.
  const Lexicon lexicon(spec.languages, 0x1ceb00daULL, spec.untranslated_rate);
  const auto first_names = shared_names(0x1ceb00daULL, "names.first");
  const auto last_names = shared_names(0x1ceb00daULL, "names.last");
  const auto place_names = shared_names(0x1ceb00daULL, "names.place");

  ParallelCorpus corpus(spec.languages);
  Rng rng(spec.seed, "synthetic.plan");
  for (std::size_t s = 0; s < spec.num_seeds; ++s) {
    SeedPlan plan;
    plan.qtype = rng.below(3);
    plan.first = rng.below(kNumNames);
    plan.last = rng.below(kNumNames);
    plan.place_kind = rng.below(kNumPlaceKinds);
    plan.place_name = rng.below(kNumNames);
    plan.month = rng.below(12);
    plan.year = 1700 + rng.below(300);
    plan.verb = rng.below(kNumVerbs);
    plan.object = rng.below(kNumNouns);
    const std::size_t fillers =
        spec.min_filler_sentences + rng.below(spec.max_filler_sentences - spec.min_filler_sentences + 1);
    plan.main_position = rng.below(fillers + 1);
    for (std::size_t f = 0; f < fillers; ++f) {
      plan.fillers.push_back({rng.below(kNumNouns), rng.below(kNumVerbs),
                              3 + rng.below(kNumFunction - 3), rng.below(kNumNouns)});
    }

    const std::string seed_id = spec.id_prefix + std::to_string(s);
    for (const auto& lang : spec.languages) {
      const Profile& prof = lexicon.profile(lang);
      auto w = [&](Kind k, std::size_t i) { return lexicon.word(lang, k, i); };
      const bool latin = prof.script == Script::kLatin;

      std::vector<Word> words;
      std::size_t mark_begin = 0;
      std::size_t mark_end = 0;
      auto sentence_start = [&](std::u32string text) {
        words.push_back(Word{latin ? capitalize(std::move(text)) : std::move(text)});
      };
      for (std::size_t pos = 0; pos <= plan.fillers.size(); ++pos) {
        if (pos == plan.main_position) {
          const std::size_t person_at = words.size();
          words.push_back(Word{first_names[plan.first]});
          words.push_back(Word{last_names[plan.last]});
          words.push_back(Word{w(Kind::kVerb, plan.verb)});
          words.push_back(Word{w(Kind::kFunction, kFnThe)});
          words.push_back(Word{w(Kind::kNoun, plan.object)});
          words.push_back(Word{w(Kind::kFunction, kFnIn)});
          const std::size_t place_at = words.size();
          words.push_back(Word{w(Kind::kPlaceKind, plan.place_kind)});
          words.push_back(Word{place_names[plan.place_name]});
          words.push_back(Word{w(Kind::kFunction, kFnOn)});
          const std::size_t time_at = words.size();
          words.push_back(Word{w(Kind::kMonth, plan.month)});
          words.push_back(Word{utf8::decode(std::to_string(plan.year))});
          words.push_back(Word{prof.period, true});
          const std::size_t at = plan.qtype == 0 ? person_at : plan.qtype == 1 ? place_at : time_at;
          mark_begin = at;
          mark_end = at + 2;
        }
        if (pos < plan.fillers.size()) {
          const auto& f = plan.fillers[pos];
          sentence_start(w(Kind::kFunction, kFnThe));
          words.push_back(Word{w(Kind::kNoun, f[0])});
          words.push_back(Word{w(Kind::kVerb, f[1])});
          words.push_back(Word{w(Kind::kFunction, f[2])});
          words.push_back(Word{w(Kind::kNoun, f[3])});
          words.push_back(Word{prof.period, true});
        }
      }
      const Assembled ctx = assemble(words, mark_begin, mark_end);

      std::vector<Word> qwords;
      qwords.push_back(Word{latin ? capitalize(w(Kind::kQuestionWord, plan.qtype))
                                  : w(Kind::kQuestionWord, plan.qtype)});
      qwords.push_back(Word{w(Kind::kVerb, plan.verb)});
      qwords.push_back(Word{w(Kind::kFunction, kFnThe)});
      qwords.push_back(Word{w(Kind::kNoun, plan.object)});
      qwords.push_back(Word{prof.question_mark, true});
      const Assembled q = assemble(qwords, 0, 0);

      QARecord rec;
      rec.question = utf8::encode(q.text);
      rec.context = utf8::encode(ctx.text);
      rec.answer_text = utf8::encode(
          std::u32string_view(ctx.text).substr(ctx.answer_begin, ctx.answer_end - ctx.answer_begin));
      rec.answer_char_start = ctx.answer_begin;
      corpus.add(seed_id, lang, std::move(rec));
    }
  }
  corpus.validate();
  return corpus;
}

}  // namespace xlskd
