use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::context::Cell as Coord;
use crate::graph::ObjectNode;
use crate::micro::{SymbolType, TypedSymbol};
use crate::predicate::{Predicate, Relation, State};
use crate::Symbol;

pub const CELL_COUNT: usize = 21;
pub const GRID_COLUMNS: usize = 7;
/// 1-based indices of the large cells.
pub const LARGE_CELLS: [usize; 3] = [12, 13, 14];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SizeClass {
    Small,
    Large,
}

impl SizeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SizeClass::Small => "small",
            SizeClass::Large => "large",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "small" => Some(SizeClass::Small),
            "large" => Some(SizeClass::Large),
            _ => None,
        }
    }
}

/// What an object can do in the micro domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObjectKind {
    /// Receives ingredients; has an orientation.
    Container,
    /// Pour source.
    Vessel,
    Shaker,
    Tool,
    Ingredient,
}

impl ObjectKind {
    pub const ALL: [ObjectKind; 5] =
        [ObjectKind::Container, ObjectKind::Vessel, ObjectKind::Shaker, ObjectKind::Tool, ObjectKind::Ingredient];

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectKind::Container => "container",
            ObjectKind::Vessel => "vessel",
            ObjectKind::Shaker => "shaker",
            ObjectKind::Tool => "tool",
            ObjectKind::Ingredient => "ingredient",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        ObjectKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    pub fn symbol_type(self) -> SymbolType {
        match self {
            ObjectKind::Container => SymbolType::Container,
            ObjectKind::Vessel => SymbolType::Vessel,
            ObjectKind::Shaker => SymbolType::Shaker,
            ObjectKind::Tool => SymbolType::Tool,
            ObjectKind::Ingredient => SymbolType::Ingredient,
        }
    }

    /// Has an interior that can be empty.
    pub fn holds_contents(self) -> bool {
        matches!(self, ObjectKind::Container | ObjectKind::Vessel | ObjectKind::Shaker)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Orientation {
    Upright,
    UpsideDown,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Upright => "upright",
            Orientation::UpsideDown => "upside_down",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "upright" => Some(Orientation::Upright),
            "upside_down" => Some(Orientation::UpsideDown),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SceneObject {
    pub label: Symbol,
    pub size: SizeClass,
    pub kind: ObjectKind,
    pub contents: BTreeSet<Symbol>,
    pub orientation: Orientation,
    pub mixed: bool,
}

impl SceneObject {
    pub fn new(label: &str, size: SizeClass, kind: ObjectKind) -> Self {
        SceneObject {
            label: Symbol::new(label).expect("valid object label"),
            size,
            kind,
            contents: BTreeSet::new(),
            orientation: Orientation::Upright,
            mixed: false,
        }
    }

    pub fn with_contents<'a>(mut self, labels: impl IntoIterator<Item = &'a str>) -> Self {
        self.contents.extend(labels.into_iter().map(|l| Symbol::new(l).expect("valid ingredient label")));
        self
    }

    /// Stackable base for the random configurations: the can or an upright
    /// cup.
    pub fn is_stack_base(&self) -> bool {
        let l = self.label.as_str();
        self.size == SizeClass::Small && (l == "can" || (l.ends_with("_cup") && self.orientation == Orientation::Upright))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TableCell {
    pub id: Symbol,
    pub size: SizeClass,
    pub occupant: Option<Symbol>,
}

/// Where a catalog object currently is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location<'a> {
    Cell(usize),
    StackedOn(&'a Symbol),
    Held,
    Inside(&'a Symbol),
    Nowhere,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scene {
    pub cells: Vec<TableCell>,
    pub objects: Vec<SceneObject>,
    pub gripper: Option<Symbol>,
    /// Object to the object directly beneath it.
    pub stacks: BTreeMap<Symbol, Symbol>,
}

pub fn cell_symbol(k: usize) -> Symbol {
    Symbol::new(&format!("cell_{k}")).expect("valid cell id")
}

/// Grid coordinate `(column, row)` of 1-based cell `k`.
pub fn cell_coord(k: usize) -> Coord {
    (((k - 1) % GRID_COLUMNS) as i32, ((k - 1) / GRID_COLUMNS) as i32)
}

/// The 21-cell table: three rows of seven, cells 12 to 14 large.
pub fn table_cells() -> Vec<TableCell> {
    (1..=CELL_COUNT)
        .map(|k| TableCell {
            id: cell_symbol(k),
            size: if LARGE_CELLS.contains(&k) { SizeClass::Large } else { SizeClass::Small },
            occupant: None,
        })
        .collect()
}

/// The eleven objects of the recipe scene with their initial contents.
pub fn catalog() -> Vec<SceneObject> {
    use ObjectKind::*;
    use SizeClass::*;
    let mut glass = SceneObject::new("drinking_glass", Small, Container);
    glass.orientation = Orientation::Upright;
    alloc::vec![
        SceneObject::new("worcestershire_cup", Small, Vessel).with_contents(["worcestershire_sauce"]),
        SceneObject::new("lemon_juice_cup", Small, Vessel).with_contents(["lemon_juice"]),
        SceneObject::new("ice_cup", Small, Vessel).with_contents(["ice"]),
        glass,
        SceneObject::new("can", Small, Vessel).with_contents(["tomato_juice"]),
        SceneObject::new("bottle", Small, Vessel).with_contents(["vodka"]),
        SceneObject::new("salt_shaker", Small, Shaker).with_contents(["salt"]),
        SceneObject::new("black_pepper_shaker", Small, Shaker).with_contents(["black_pepper"]),
        SceneObject::new("spoon", Large, Tool),
        SceneObject::new("celery", Large, Ingredient),
        SceneObject::new("knife", Large, Tool),
    ]
}

/// Catalog item `i` (0-based) stands on cell `i + 4`.
pub fn standard_scene() -> Scene {
    let mut cells = table_cells();
    let objects = catalog();
    for (i, o) in objects.iter().enumerate() {
        cells[i + 3].occupant = Some(o.label.clone());
    }
    Scene { cells, objects, gripper: None, stacks: BTreeMap::new() }
}

/// Probabilities used by [`random_scene_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSceneConfig {
    pub upside_down: f64,
    pub stack: f64,
}

impl Default for RandomSceneConfig {
    fn default() -> Self {
        RandomSceneConfig { upside_down: 0.25, stack: 0.3 }
    }
}

pub fn random_scene(seed: u64) -> Scene {
    random_scene_with(seed, &RandomSceneConfig::default())
}

/// Large objects are shuffled over the large cells, small objects over the
/// small cells; the glass may be turned upside down and each small object
/// may be stacked on the can or an upright cup that stands on a cell.
pub fn random_scene_with(seed: u64, config: &RandomSceneConfig) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = table_cells();
    let mut objects = catalog();
    for o in &mut objects {
        if o.kind == ObjectKind::Container && rng.gen_bool(config.upside_down) {
            o.orientation = Orientation::UpsideDown;
        }
    }
    let mut large_cells: Vec<usize> = LARGE_CELLS.iter().map(|k| k - 1).collect();
    let mut small_cells: Vec<usize> = (0..CELL_COUNT).filter(|i| !LARGE_CELLS.contains(&(i + 1))).collect();
    large_cells.shuffle(&mut rng);
    small_cells.shuffle(&mut rng);

    let mut stacks = BTreeMap::new();
    let mut order: Vec<usize> = (0..objects.len()).collect();
    order.shuffle(&mut rng);
    // objects that carry something or sit on something
    let mut busy: BTreeSet<usize> = BTreeSet::new();
    for &i in &order {
        if objects[i].size == SizeClass::Large {
            let c = large_cells.pop().expect("enough large cells");
            cells[c].occupant = Some(objects[i].label.clone());
            continue;
        }
        let bases: Vec<usize> = (0..objects.len())
            .filter(|&b| b != i && objects[b].is_stack_base() && !busy.contains(&b))
            .filter(|&b| cells.iter().any(|c| c.occupant.as_ref() == Some(&objects[b].label)))
            .collect();
        if !bases.is_empty() && !busy.contains(&i) && rng.gen_bool(config.stack) {
            let b = *bases.choose(&mut rng).unwrap();
            stacks.insert(objects[i].label.clone(), objects[b].label.clone());
            busy.insert(b);
            busy.insert(i);
            continue;
        }
        let c = small_cells.pop().expect("enough small cells");
        cells[c].occupant = Some(objects[i].label.clone());
    }
    Scene { cells, objects, gripper: None, stacks }
}

/// A broken scene invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SceneViolation(pub String);

impl Scene {
    pub fn object(&self, label: &Symbol) -> Option<&SceneObject> {
        self.objects.iter().find(|o| &o.label == label)
    }

    pub fn object_mut(&mut self, label: &Symbol) -> Option<&mut SceneObject> {
        self.objects.iter_mut().find(|o| &o.label == label)
    }

    pub fn cell_index(&self, id: &Symbol) -> Option<usize> {
        self.cells.iter().position(|c| &c.id == id)
    }

    pub fn cell_of_occupant(&self, label: &Symbol) -> Option<usize> {
        self.cells.iter().position(|c| c.occupant.as_ref() == Some(label))
    }

    /// The object stacked directly on `label`, if any.
    pub fn top_of(&self, label: &Symbol) -> Option<&Symbol> {
        self.stacks.iter().find(|(_, base)| *base == label).map(|(top, _)| top)
    }

    pub fn location(&self, label: &Symbol) -> Location<'_> {
        if let Some(c) = self.cell_of_occupant(label) {
            return Location::Cell(c);
        }
        if let Some((_, base)) = self.stacks.get_key_value(label) {
            return Location::StackedOn(base);
        }
        if self.gripper.as_ref() == Some(label) {
            return Location::Held;
        }
        if let Some(c) = self.objects.iter().find(|o| o.contents.contains(label)) {
            return Location::Inside(&c.label);
        }
        Location::Nowhere
    }

    /// Coordinate of the cell under `label`, following stacks down.
    pub fn coord_of(&self, label: &Symbol) -> Option<Coord> {
        if let Some(i) = self.cell_index(label) {
            return Some(cell_coord(i + 1));
        }
        match self.location(label) {
            Location::Cell(i) => Some(cell_coord(i + 1)),
            Location::StackedOn(base) => self.coord_of(base),
            Location::Inside(c) => self.coord_of(c),
            Location::Held | Location::Nowhere => None,
        }
    }

    pub fn violations(&self) -> Vec<SceneViolation> {
        let mut out = Vec::new();
        let mut bad = |m: String| out.push(SceneViolation(m));
        if self.cells.len() != CELL_COUNT {
            bad(format!("{} cells instead of {CELL_COUNT}", self.cells.len()));
        }
        let large = self.cells.iter().filter(|c| c.size == SizeClass::Large).count();
        if large != LARGE_CELLS.len() {
            bad(format!("{large} large cells"));
        }
        let labels: BTreeSet<&Symbol> = self.objects.iter().map(|o| &o.label).collect();
        if labels.len() != self.objects.len() {
            bad(String::from("duplicate object labels"));
        }
        for cell in &self.cells {
            if let Some(o) = &cell.occupant {
                match self.object(o) {
                    None => bad(format!("{} holds unknown object {o}", cell.id)),
                    Some(obj) if obj.size == SizeClass::Large && cell.size == SizeClass::Small => {
                        bad(format!("large object {o} on small cell {}", cell.id))
                    }
                    _ => {}
                }
            }
        }
        for (top, base) in &self.stacks {
            if self.object(top).is_none() || self.object(base).is_none() {
                bad(format!("stack {top} on {base} names an unknown object"));
            }
            if top == base {
                bad(format!("{top} stacked on itself"));
            }
            if self.stacks.values().filter(|b| *b == base).count() > 1 {
                bad(format!("several objects stacked on {base}"));
            }
            if self.gripper.as_ref() == Some(base) {
                bad(format!("held object {base} carries {top}"));
            }
            // no cycles
            let mut cur = base;
            let mut depth = 0;
            while let Some(next) = self.stacks.get(cur) {
                cur = next;
                depth += 1;
                if depth > self.stacks.len() {
                    bad(format!("stack cycle through {top}"));
                    break;
                }
            }
        }
        if let Some(g) = &self.gripper {
            if self.object(g).is_none() {
                bad(format!("gripper holds unknown object {g}"));
            }
        }
        for o in &self.objects {
            let mut places = 0;
            places += self.cells.iter().filter(|c| c.occupant.as_ref() == Some(&o.label)).count();
            places += usize::from(self.stacks.contains_key(&o.label));
            places += usize::from(self.gripper.as_ref() == Some(&o.label));
            places += self.objects.iter().filter(|c| c.contents.contains(&o.label)).count();
            if places != 1 {
                bad(format!("{} is in {places} places", o.label));
            }
            if o.contents.contains(&o.label) {
                bad(format!("{} contains itself", o.label));
            }
            if !o.contents.is_empty() && !o.kind.holds_contents() {
                bad(format!("{} cannot hold contents", o.label));
            }
        }
        out
    }

    /// Typed symbols for grounding: cells, catalog objects and every
    /// ingredient mentioned in a container.
    pub fn typed_symbols(&self) -> Vec<TypedSymbol> {
        let mut out: Vec<TypedSymbol> = self
            .cells
            .iter()
            .map(|c| {
                let ty = if c.size == SizeClass::Large { SymbolType::LargeSurface } else { SymbolType::Surface };
                TypedSymbol::new(c.id.clone(), ty)
            })
            .collect();
        let mut seen: BTreeSet<&Symbol> = BTreeSet::new();
        for o in &self.objects {
            seen.insert(&o.label);
            out.push(TypedSymbol::new(o.label.clone(), o.kind.symbol_type()));
        }
        for o in &self.objects {
            for i in &o.contents {
                if seen.insert(i) {
                    out.push(TypedSymbol::new(i.clone(), SymbolType::Ingredient));
                }
            }
        }
        out
    }

    /// FOON object nodes describing the scene contents, for task tree
    /// retrieval.
    pub fn kitchen(&self) -> Vec<ObjectNode> {
        let mut out: Vec<ObjectNode> = self
            .objects
            .iter()
            .filter(|o| !matches!(self.location(&o.label), Location::Inside(_)))
            .map(|o| {
                let mut n = ObjectNode::new(o.label.clone());
                n.set_ingredients(o.contents.clone());
                if o.kind.holds_contents() && o.contents.is_empty() {
                    n = n.with_physical("empty");
                }
                if o.mixed {
                    n = n.with_physical("mixed");
                }
                n
            })
            .collect();
        out.push(ObjectNode::new(Symbol::table()));
        out
    }
}

fn rel(rel: Relation, a: &Symbol, b: &Symbol) -> Predicate {
    Predicate::Relation { rel, focal: a.clone(), relative: b.clone() }
}

fn attr(label: &str, a: &Symbol) -> Predicate {
    Predicate::Attribute { label: Symbol::new(label).unwrap(), focal: a.clone() }
}

/// Micro-level facts of a scene.
pub fn scene_to_state(scene: &Scene) -> State {
    use Relation::*;
    let air = Symbol::air();
    let hand = Symbol::hand();
    let mut s = State::new();
    for cell in &scene.cells {
        match &cell.occupant {
            Some(o) => {
                s.insert(rel(On, &cell.id, o));
                s.insert(rel(Under, o, &cell.id));
                s.insert(attr("placed", o));
            }
            None => {
                s.insert(rel(On, &cell.id, &air));
            }
        }
    }
    for (top, base) in &scene.stacks {
        s.insert(rel(On, base, top));
        s.insert(rel(Under, top, base));
    }
    match &scene.gripper {
        Some(o) => {
            s.insert(rel(In, &hand, o));
            s.insert(rel(On, o, &hand));
            s.insert(rel(Under, o, &air));
        }
        None => {
            s.insert(rel(In, &hand, &air));
        }
    }
    for o in &scene.objects {
        let supported = matches!(scene.location(&o.label), Location::Cell(_) | Location::StackedOn(_));
        if supported && scene.top_of(&o.label).is_none() {
            s.insert(rel(On, &o.label, &air));
        }
        for i in &o.contents {
            s.insert(rel(In, &o.label, i));
            s.insert(rel(Under, i, &o.label));
        }
        if o.kind.holds_contents() && o.contents.is_empty() {
            s.insert(rel(In, &o.label, &air));
        }
        if o.kind == ObjectKind::Container {
            s.insert(attr(
                match o.orientation {
                    Orientation::Upright => "is-upright",
                    Orientation::UpsideDown => "is-upside-down",
                },
                &o.label,
            ));
        }
        if o.mixed {
            s.insert(attr("is-mixed", &o.label));
        }
        s.insert(attr(
            match o.size {
                SizeClass::Small => "is-small",
                SizeClass::Large => "is-large",
            },
            &o.label,
        ));
    }
    s
}
