#include "textgcn/tasks.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace textgcn {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::optional<Task> task_from_name(std::string_view name) {
  const std::string n = lower(name);
  for (Task t : kAllTasks)
    if (n == task_name(t)) return t;
  return std::nullopt;
}

const char* class_name(Task t, int cls) {
  static constexpr const char* kSa[] = {"Negative", "Positive"};
  static constexpr const char* kEi[] = {"Fear", "Angry", "Sad", "Happy"};
  static constexpr const char* kYesNo[] = {"No", "Yes"};
  if (cls < 0 || cls >= class_count(t)) return "?";
  switch (t) {
    case Task::Sa:
      return kSa[cls];
    case Task::Ei:
      return kEi[cls];
    default:
      return kYesNo[cls];
  }
}

std::optional<int> parse_label(Task t, std::string_view value) {
  int v = 0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec == std::errc() && ptr == last) {
    if (v < 0 || v >= class_count(t)) return std::nullopt;
    return v;
  }
  const std::string n = lower(value);
  for (int c = 0; c < class_count(t); ++c)
    if (n == lower(class_name(t, c))) return c;
  return std::nullopt;
}

}  // namespace textgcn
