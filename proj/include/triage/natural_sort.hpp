#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace triage {

/// Orders digit runs by numeric value, so "frame2" < "frame10" and
/// "frame_002" == "frame_2" up to a final plain-text tie-break.
bool natural_less(std::string_view a, std::string_view b);

void natural_sort(std::vector<std::string>& names);

}  // namespace triage
