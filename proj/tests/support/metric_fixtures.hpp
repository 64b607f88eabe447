#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace xlskd::fixtures {

// Hand-scored answer pairs. F1 is the exact fraction num / den.
struct MetricCase {
  std::string prediction;
  std::string gold;
  std::string lang;
  std::size_t f1_num;
  std::size_t f1_den;
  int em;
};

inline const std::vector<MetricCase>& metric_cases() {
  static const std::vector<MetricCase> cases = {
      {"Eiffel Tower", "the Eiffel Tower", "en", 1, 1, 1},
      {"Rome", "Rome", "en", 1, 1, 1},
      {"in Rome", "Rome", "en", 2, 3, 0},
      {"Ana Costa", "Ana Lima", "en", 1, 2, 0},
      {"Paris", "Rome", "en", 0, 1, 0},
      {"", "Rome", "en", 0, 1, 0},
      {"", "", "en", 1, 1, 1},
      {"The", "the", "en", 1, 1, 1},
      {"Rome!", "rome", "en", 1, 1, 1},
      {"1930", "May 1930", "en", 2, 3, 0},
      {"May 1930 in Rome", "May 1930", "en", 2, 3, 0},
      {"x y z", "y z w", "en", 2, 3, 0},
      {"Der Turm", "der turm", "de", 1, 1, 1},
      {"the the Rome", "Rome", "en", 1, 1, 1},
      {"Rome Rome", "Rome", "en", 2, 3, 0},
      {"东京", "东京塔", "zh", 4, 5, 0},
      {"Ана", "ана", "ru", 1, 1, 1},
      {"Straße.", "straße", "de", 1, 1, 1},
      {"an apple", "apple", "en", 1, 1, 1},
      {"apple, pear", "pear apple", "en", 1, 1, 0},
  };
  return cases;
}

}  // namespace xlskd::fixtures
