#ifndef CZREACH_FACTOR_HPP
#define CZREACH_FACTOR_HPP

#include "czreach/types.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

namespace czreach
{

// Identifier of a dependent factor alpha in [-1, 1].
struct FactorId
{
    std::uint64_t value = 0;

    friend auto operator<=>(const FactorId&, const FactorId&) = default;
};

// Returns count ids never handed out before in this process. Safe to call
// concurrently. Allocated values start at 2^20 so that small hand-written ids
// in literals never collide with allocated ones.
std::vector<FactorId> fresh_ids(std::size_t count);

// Convenience for a single id.
FactorId fresh_id();

std::vector<FactorId> make_ids(std::initializer_list<std::uint64_t> values);

} // namespace czreach

template<>
struct std::hash<czreach::FactorId>
{
    std::size_t operator()(const czreach::FactorId& id) const noexcept
    {
        return std::hash<std::uint64_t>{}(id.value);
    }
};

namespace czreach
{

// Mapping from factor ids to values in [-1, 1].
class FactorAssignment
{
    public:
        FactorAssignment() = default;

        // Values within 1e-9 outside [-1, 1] are clamped (round-off from
        // derived factors); anything further out throws std::out_of_range.
        void set(FactorId id, double value);

        bool contains(FactorId id) const { return values_.contains(id); }

        // Throws MissingFactor when absent.
        double at(FactorId id) const;

        std::size_t size() const { return values_.size(); }
        bool empty() const { return values_.empty(); }

        // Copies all entries of other, overwriting duplicates.
        void merge(const FactorAssignment& other);

        // Values for ids in order; throws MissingFactor.
        Vector gather(std::span<const FactorId> ids) const;

        // Entries sorted by id, for deterministic output.
        std::vector<std::pair<FactorId, double>> sorted() const;

        // Restriction to the given ids (missing ids are skipped).
        FactorAssignment restrict_to(std::span<const FactorId> ids) const;

    private:
        std::unordered_map<FactorId, double> values_;
};

} // namespace czreach

#endif
