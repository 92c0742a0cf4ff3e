#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pscript/grammar.hpp"
#include "pscript/object_mask.hpp"

namespace pscript {

enum class Direction : uint8_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

// Force bits as stored per collision layer; at most one is set at a time.
inline constexpr uint8_t kForceUp = 1;
inline constexpr uint8_t kForceDown = 2;
inline constexpr uint8_t kForceLeft = 4;
inline constexpr uint8_t kForceRight = 8;
inline constexpr uint8_t kForceAction = 16;
inline constexpr uint8_t kForceAnyDir = 15;

inline uint8_t force_of(Direction d) { return static_cast<uint8_t>(1u << static_cast<int>(d)); }
const char* direction_name(Direction d);
const char* force_name(uint8_t force);

struct Rgb {
  uint8_t r = 0, g = 0, b = 0;
  bool transparent = false;
  bool operator==(const Rgb&) const = default;
};

// Resolves a named color or #rgb / #rrggbb hex code.
std::optional<Rgb> parse_color(std::string_view name);

// ---------------------------------------------------------------------------
// Symbol tables

struct ObjectRecord {
  ObjectId id = 0;
  std::string name;
  std::optional<Sprite> sprite;
  std::vector<Rgb> colors;
  int line = 0;
};

struct ObjectTable {
  std::vector<ObjectRecord> objects;
  std::map<std::string, ObjectId, std::less<>> by_name;

  std::optional<ObjectId> find(std::string_view name) const;
  int size() const { return static_cast<int>(objects.size()); }
};

struct LegendTable {
  std::map<std::string, ObjectMask, std::less<>> meta;       // from `or`
  std::map<std::string, ObjectMask, std::less<>> aggregate;  // from `and`
  std::map<std::string, ObjectId, std::less<>> alias;        // single atomic
  std::map<char, ObjectMask> glyphs;                         // level glyphs

  enum class Kind { kAtomic, kMeta, kAggregate };
  struct Resolved {
    Kind kind;
    ObjectMask members;
  };
  // Resolves any name (atomic, alias, meta, aggregate) to its atomic ids.
  std::optional<Resolved> resolve(std::string_view name, const ObjectTable& objects) const;
};

struct LayerTable {
  std::vector<int> layer_of;                  // per atomic id, -1 if unassigned
  std::vector<std::vector<ObjectId>> layers;  // declaration order
  std::vector<ObjectMask> layer_masks;

  int size() const { return static_cast<int>(layers.size()); }
};

// ---------------------------------------------------------------------------
// Compiled rules

enum class Qualifier : uint8_t {
  kPresent,     // object present, any force
  kAbsent,      // `no`
  kStationary,  // present with no force
  kForce,       // fixed force bits (absolute, relative, action)
  kBound,       // moving / horizontal / vertical / orthogonal / parallel /
                // perpendicular: matches a set and binds the direction
  kRandomDir,   // right-hand side only
};

struct PatternEntry {
  std::string name;
  ObjectMask members;
  bool is_meta = false;
  Qualifier qualifier = Qualifier::kPresent;
  uint8_t force = 0;        // kForce: exact bits; kBound: allowed set
  int8_t binding_slot = -1; // kBound only
  std::string keyword;      // source qualifier token after relative mapping
  int layer = -1;           // single layer, or -1 if members span layers
  int meta_slot = -1;       // positive meta entries: where the match records its id
};

// Right-hand side instructions for one cell.
struct CellEffect {
  enum class MoveOp : uint8_t { kKeep, kClear, kSet, kSetBound, kRandom };
  struct Put {
    ObjectId id = -1;        // atomic id, or -1 when taken from a meta binding
    int bind_slot = -1;      // meta slot holding the bound id
    MoveOp op = MoveOp::kKeep;
    uint8_t force = 0;
    int8_t slot = -1;
  };
  ObjectMask clear;                 // explicit `no X` on the right
  std::vector<int> remove_entries;  // lhs entries whose matched object is dropped
  std::vector<Put> puts;
  bool empty() const { return clear.empty() && remove_entries.empty() && puts.empty(); }
};

struct CellPattern {
  std::vector<PatternEntry> entries;
  bool is_ellipsis = false;

  // Matching summary derived from `entries`.
  ObjectMask all_present;   // atomic positive entries
  ObjectMask none_present;  // union of negated entries
  std::vector<int> meta_entries;   // positive meta entries
  std::vector<int> force_entries;  // positive atomic entries with a force test
};

using Kernel = std::vector<CellPattern>;

struct RuleCommands {
  bool win = false;
  bool again = false;
  bool restart = false;
  bool cancel = false;
  bool checkpoint = false;
  std::optional<std::string> message;
  std::vector<std::string> sfx;

  bool any() const {
    return win || again || restart || cancel || checkpoint || message.has_value();
  }
};

struct CompiledRule {
  Direction direction = Direction::kUp;
  std::vector<Kernel> lhs;
  std::vector<Kernel> rhs;  // empty for command-only rules
  RuleCommands commands;
  bool is_late = false;
  bool is_random = false;
  int source_line = 0;
  int binding_slots = 0;  // direction bindings (moving, parallel, ...)
  int meta_slots = 0;     // meta-object bindings

  // Derived: one effect per lhs cell, flattened kernel-major.
  std::vector<CellEffect> effects;
  std::vector<int> kernel_offsets;  // flattened index of each kernel's first cell
  ObjectMask required_objects;      // atomic ids some cell requires
  std::vector<ObjectMask> required_any;
  std::vector<std::pair<int, uint8_t>> required_forces;  // (layer, exact bit)
  bool uses_random = false;
  bool references_action = false;
};

struct RuleGroup {
  std::vector<CompiledRule> rules;
  bool is_late = false;
  bool is_random = false;
  int source_line = 0;
};

struct Block {
  bool is_loop = false;
  std::vector<RuleGroup> groups;
};

struct WinCondition {
  enum class Kind { kAllOn, kSomeOn, kNoOn, kSome, kNone };
  Kind kind = Kind::kSome;
  ObjectMask a;
  std::optional<ObjectMask> b;
  std::string a_name, b_name;
  int line = 0;
};

struct LevelDef {
  bool is_message = false;
  std::string message;
  int width = 0;
  int height = 0;
  std::vector<ObjectMask> cells;  // row-major
  std::vector<std::string> rows;  // glyph rows as written
  int line = 0;
};

struct PreludeFlags {
  std::string title;
  std::string author;
  std::string homepage;
  bool run_rules_on_level_start = false;
  bool noaction = false;
  bool norepeat_action = false;
  bool noundo = false;
  bool norestart = false;
  bool require_player_movement = false;
  std::optional<std::string> flickscreen;
  std::optional<std::string> zoomscreen;
  std::optional<std::string> background_color;
  std::optional<std::string> text_color;
  std::optional<double> again_interval;
  std::optional<double> realtime_interval;
  std::vector<std::pair<std::string, std::optional<std::string>>> other;
};

struct GameDef {
  ObjectTable object_table;
  LegendTable legend_table;
  LayerTable layer_table;
  std::vector<Block> blocks;
  std::vector<Block> late_blocks;
  std::vector<WinCondition> win_conditions;
  std::vector<LevelDef> levels;
  PreludeFlags prelude;
  ObjectMask player_ids;
  ObjectId background_id = 0;
  int source_rule_lines = 0;
  uint64_t source_digest = 0;  // FNV-1a 64 of the raw source text
  std::vector<Diagnostic> warnings;

  int num_objects() const { return object_table.size(); }
  int num_layers() const { return layer_table.size(); }
  int object_words() const { return (num_objects() + 63) / 64; }
  int compiled_variant_count() const;
  bool uses_randomness() const;
  bool uses_checkpoint() const;
  bool references_action() const;
  std::vector<int> playable_levels() const;
};

// Everything the per-rule compiler needs.
struct CompileTables {
  const ObjectTable& objects;
  const LegendTable& legend;
  const LayerTable& layers;
};

ObjectTable build_object_table(const GameAst& ast);
LegendTable resolve_legend(const GameAst& ast, const ObjectTable& objects);
LayerTable build_layers(const GameAst& ast, const ObjectTable& objects,
                        const LegendTable& legend, std::vector<Diagnostic>* warnings);
RuleGroup compile_rule(const RuleAst& line, const CompileTables& tables);
GameDef compile_game(const GameAst& ast);

// preprocess + parse + compile_game.
GameDef compile_source(const SourceText& source);
std::shared_ptr<const GameDef> load_game(const std::string& path);

// Versioned JSON dump of the compiled game for golden tests.
std::string game_to_json(const GameDef& game);

}  // namespace pscript
