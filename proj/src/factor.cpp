#include "czreach/factor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

namespace czreach
{

namespace
{

std::atomic<std::uint64_t> next_factor_id{std::uint64_t{1} << 20};

} // namespace

std::vector<FactorId> fresh_ids(std::size_t count)
{
    const std::uint64_t first = next_factor_id.fetch_add(count);
    std::vector<FactorId> ids(count);
    for (std::size_t i = 0; i < count; ++i)
    {
        ids[i] = FactorId{first + i};
    }
    return ids;
}

FactorId fresh_id()
{
    return fresh_ids(1).front();
}

std::vector<FactorId> make_ids(std::initializer_list<std::uint64_t> values)
{
    std::vector<FactorId> ids;
    ids.reserve(values.size());
    for (auto v : values)
    {
        ids.push_back(FactorId{v});
    }
    return ids;
}

void FactorAssignment::set(FactorId id, double value)
{
    if (!std::isfinite(value) || std::abs(value) > 1.0 + 1e-9)
    {
        throw std::out_of_range("factor " + std::to_string(id.value) + " value " +
                                std::to_string(value) + " outside [-1, 1]");
    }
    values_[id] = std::clamp(value, -1.0, 1.0);
}

double FactorAssignment::at(FactorId id) const
{
    auto it = values_.find(id);
    if (it == values_.end())
    {
        throw MissingFactor("no value for factor " + std::to_string(id.value));
    }
    return it->second;
}

void FactorAssignment::merge(const FactorAssignment& other)
{
    for (const auto& [id, v] : other.values_)
    {
        values_[id] = v;
    }
}

Vector FactorAssignment::gather(std::span<const FactorId> ids) const
{
    Vector out(static_cast<Index>(ids.size()));
    for (std::size_t k = 0; k < ids.size(); ++k)
    {
        out(static_cast<Index>(k)) = at(ids[k]);
    }
    return out;
}

std::vector<std::pair<FactorId, double>> FactorAssignment::sorted() const
{
    std::vector<std::pair<FactorId, double>> out(values_.begin(), values_.end());
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

FactorAssignment FactorAssignment::restrict_to(std::span<const FactorId> ids) const
{
    FactorAssignment out;
    for (auto id : ids)
    {
        auto it = values_.find(id);
        if (it != values_.end())
        {
            out.values_.emplace(id, it->second);
        }
    }
    return out;
}

} // namespace czreach
