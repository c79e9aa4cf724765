#include "drpo/events.hpp"

namespace drpo {

void WarningLog::warn(std::string category, std::string message)
{
  std::lock_guard lock(mutex_);
  entries_.push_back({std::move(category), std::move(message)});
}

std::vector<Warning> WarningLog::snapshot() const
{
  std::lock_guard lock(mutex_);
  return entries_;
}

std::size_t WarningLog::size() const
{
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::size_t WarningLog::count(const std::string& category) const
{
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& entry : entries_) {
    if (entry.category == category) {
      ++n;
    }
  }
  return n;
}

std::map<std::string, std::size_t> WarningLog::counts() const
{
  std::lock_guard lock(mutex_);
  std::map<std::string, std::size_t> out;
  for (const auto& entry : entries_) {
    ++out[entry.category];
  }
  return out;
}

} // namespace drpo
