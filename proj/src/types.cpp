// SPDX-License-Identifier: Apache-2.0

#include "mwc/types.hpp"

#include <algorithm>

#include "mwc/error.hpp"

namespace mwc {

InvalidScenario::InvalidScenario(std::vector<FieldError> errors)
    : std::invalid_argument([&] {
          std::string msg = "invalid scenario";
          for (const auto& e : errors) msg += "; " + e.path + ": " + e.message;
          return msg;
      }()),
      errors_(std::move(errors))
{
}

SupportSet::SupportSet(std::vector<int> idx) : indices(std::move(idx))
{
    std::ranges::sort(indices);
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
}

bool SupportSet::contains(int l) const { return std::ranges::binary_search(indices, l); }

void SupportSet::insert(int l)
{
    auto it = std::ranges::lower_bound(indices, l);
    if (it == indices.end() || *it != l) indices.insert(it, l);
}

SupportSet SupportSet::symmetrized() const
{
    std::vector<int> out = indices;
    for (int l : indices) out.push_back(-l);
    return SupportSet(std::move(out));
}

}  // namespace mwc
