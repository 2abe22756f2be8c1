#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace textgcn {

// The four classification tasks: sentiment, emotion, hate speech, sarcasm.
enum class Task : int { Sa = 0, Ei = 1, Hs = 2, Sar = 3 };

inline constexpr std::size_t kTaskCount = 4;
inline constexpr std::array<Task, kTaskCount> kAllTasks = {Task::Sa, Task::Ei,
                                                           Task::Hs, Task::Sar};

constexpr int class_count(Task t) {
  switch (t) {
    case Task::Ei:
      return 4;
    default:
      return 2;
  }
}

constexpr const char* task_name(Task t) {
  switch (t) {
    case Task::Sa:
      return "sa";
    case Task::Ei:
      return "ei";
    case Task::Hs:
      return "hs";
    case Task::Sar:
      return "sar";
  }
  return "?";
}

std::optional<Task> task_from_name(std::string_view name);

// Class label names; SA {0:Negative,1:Positive}, EI {Fear,Angry,Sad,Happy},
// HS/SAR {0:No,1:Yes}.
const char* class_name(Task t, int cls);

// Parses a label given as an integer string or a class name
// (case-insensitive). Returns nullopt for unknown values.
std::optional<int> parse_label(Task t, std::string_view value);

}  // namespace textgcn
