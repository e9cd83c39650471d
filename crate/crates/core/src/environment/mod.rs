//! The grid world: cell encoding, the city map, procedural layouts and obstacles.

mod codec;
mod cost;
mod layout;
mod obstacles;

pub use codec::{parse_grid, parse_obstacles, serialize_grid, serialize_obstacles, GridError};
pub use cost::{driver_cost, walker_cost};
pub use layout::{generate_layout, LayoutError, LayoutSpec};
pub use obstacles::{place_obstacles, place_obstacles_among};

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lane center offset inside a cell, as a fraction of the cell side.
pub const DEFAULT_LANE_CENTER: f64 = 0.5;

/// Integer cell coordinate. `x` grows east, `y` grows south (row 0 is the northern edge).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub const fn new(x: usize, y: usize) -> Self {
        Cell { x, y }
    }

    /// Continuous coordinate of the cell center.
    pub fn center(self) -> Point {
        Point::new(self.x as f64 + 0.5, self.y as f64 + 0.5)
    }

    /// The direction leading from `self` to a 4-adjacent `other`.
    pub fn direction_to(self, other: Cell) -> Option<Direction> {
        let dx = other.x as isize - self.x as isize;
        let dy = other.y as isize - self.y as isize;
        Direction::ALL.into_iter().find(|d| d.delta() == (dx, dy))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Continuous position in cell units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// The cell containing this point (`floor` of both coordinates), if non-negative.
    pub fn cell(self) -> Option<Cell> {
        if self.x < 0.0 || self.y < 0.0 {
            return None;
        }
        Some(Cell::new(self.x.floor() as usize, self.y.floor() as usize))
    }
}

/// Cardinal travel direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    /// Fixed neighbor expansion order.
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];

    pub const fn delta(self) -> (isize, isize) {
        match self {
            Direction::North => (0, -1),
            Direction::East => (1, 0),
            Direction::South => (0, 1),
            Direction::West => (-1, 0),
        }
    }

    pub const fn opposite(self) -> Direction {
        match self {
            Direction::North => Direction::South,
            Direction::East => Direction::West,
            Direction::South => Direction::North,
            Direction::West => Direction::East,
        }
    }

    /// Clockwise quarter turn.
    pub const fn right(self) -> Direction {
        match self {
            Direction::North => Direction::East,
            Direction::East => Direction::South,
            Direction::South => Direction::West,
            Direction::West => Direction::North,
        }
    }

    pub const fn left(self) -> Direction {
        self.right().opposite()
    }

    pub fn is_perpendicular(self, other: Direction) -> bool {
        other == self.right() || other == self.left()
    }

    pub const fn as_char(self) -> char {
        match self {
            Direction::North => 'N',
            Direction::East => 'E',
            Direction::South => 'S',
            Direction::West => 'W',
        }
    }

    pub fn from_char(c: char) -> Option<Direction> {
        match c {
            'N' => Some(Direction::North),
            'E' => Some(Direction::East),
            'S' => Some(Direction::South),
            'W' => Some(Direction::West),
            _ => None,
        }
    }

    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn unit(self) -> (f64, f64) {
        let (dx, dy) = self.delta();
        (dx as f64, dy as f64)
    }
}

/// Ground type of a cell. Exactly one per cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroundType {
    Road,
    Sidewalk,
    Building,
    Parking,
    Zebra,
    TurnCell,
    LeftTurnCell,
    Obstacle,
    Pothole,
}

impl GroundType {
    pub const ALL: [GroundType; 9] = [
        GroundType::Road,
        GroundType::Sidewalk,
        GroundType::Building,
        GroundType::Parking,
        GroundType::Zebra,
        GroundType::TurnCell,
        GroundType::LeftTurnCell,
        GroundType::Obstacle,
        GroundType::Pothole,
    ];

    pub const fn as_char(self) -> char {
        match self {
            GroundType::Road => 'r',
            GroundType::Sidewalk => 's',
            GroundType::Building => 'b',
            GroundType::Parking => 'p',
            GroundType::Zebra => 'z',
            GroundType::TurnCell => 't',
            GroundType::LeftTurnCell => 'l',
            GroundType::Obstacle => 'o',
            GroundType::Pothole => 'h',
        }
    }

    pub fn from_char(c: char) -> Option<GroundType> {
        GroundType::ALL.into_iter().find(|g| g.as_char() == c)
    }

    /// Cells that advertise vehicular flow directions.
    pub const fn carries_flow(self) -> bool {
        !matches!(
            self,
            GroundType::Sidewalk | GroundType::Building | GroundType::Obstacle
        )
    }

    /// Vehicle ground a pedestrian is not supposed to stand on. Zebra and
    /// parking cells are excluded.
    pub const fn is_road_family(self) -> bool {
        matches!(
            self,
            GroundType::Road | GroundType::TurnCell | GroundType::LeftTurnCell | GroundType::Pothole
        )
    }

    pub const fn is_turn(self) -> bool {
        matches!(self, GroundType::TurnCell | GroundType::LeftTurnCell)
    }
}

/// Permitted vehicular flow: zero, one or two distinct directions, kept in
/// encoding order so that serialization is bit-exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Flow([Option<Direction>; 2]);

impl Flow {
    pub const NONE: Flow = Flow([None, None]);

    pub const fn one(d: Direction) -> Flow {
        Flow([Some(d), None])
    }

    /// Two distinct directions. Returns `None` for a duplicate pair.
    pub fn two(a: Direction, b: Direction) -> Option<Flow> {
        (a != b).then_some(Flow([Some(a), Some(b)]))
    }

    pub fn is_empty(&self) -> bool {
        self.0[0].is_none()
    }

    pub fn len(&self) -> usize {
        self.0.iter().flatten().count()
    }

    pub fn contains(&self, d: Direction) -> bool {
        self.0.contains(&Some(d))
    }

    pub fn first(&self) -> Option<Direction> {
        self.0[0]
    }

    pub fn iter(&self) -> impl Iterator<Item = Direction> + '_ {
        self.0.iter().flatten().copied()
    }

    /// Same directions regardless of encoding order.
    pub fn same_set(&self, other: &Flow) -> bool {
        self.len() == other.len() && self.iter().all(|d| other.contains(d))
    }
}

/// Malformed cell encoding.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CellCodeError {
    #[error("token must be exactly 3 characters")]
    Length,
    #[error("unknown ground character {0:?}")]
    Ground(char),
    #[error("unknown direction character {0:?}")]
    Direction(char),
    #[error("direction listed twice")]
    Duplicate,
    #[error("direction after the '-' sentinel")]
    SentinelOrder,
    #[error("{0:?} cells carry no flow")]
    UnexpectedFlow(GroundType),
    #[error("{0:?} cells need at least one flow direction")]
    MissingFlow(GroundType),
}

/// One grid cell: ground type plus allowed flow directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellCode {
    pub ground: GroundType,
    pub flow: Flow,
}

impl CellCode {
    pub fn new(ground: GroundType, flow: Flow) -> Result<CellCode, CellCodeError> {
        match (ground.carries_flow(), flow.is_empty()) {
            (false, false) => Err(CellCodeError::UnexpectedFlow(ground)),
            (true, true) => Err(CellCodeError::MissingFlow(ground)),
            _ => Ok(CellCode { ground, flow }),
        }
    }

    /// Flowless cell (sidewalk, building, obstacle).
    pub const fn bare(ground: GroundType) -> CellCode {
        CellCode {
            ground,
            flow: Flow::NONE,
        }
    }

    pub const fn lane(ground: GroundType, d: Direction) -> CellCode {
        CellCode {
            ground,
            flow: Flow::one(d),
        }
    }

    pub fn parse(token: &str) -> Result<CellCode, CellCodeError> {
        let chars: Vec<char> = token.chars().collect();
        if chars.len() != 3 {
            return Err(CellCodeError::Length);
        }
        let ground = GroundType::from_char(chars[0]).ok_or(CellCodeError::Ground(chars[0]))?;
        let slot = |c: char| -> Result<Option<Direction>, CellCodeError> {
            if c == '-' {
                Ok(None)
            } else {
                Direction::from_char(c)
                    .map(Some)
                    .ok_or(CellCodeError::Direction(c))
            }
        };
        let flow = match (slot(chars[1])?, slot(chars[2])?) {
            (None, None) => Flow::NONE,
            (Some(a), None) => Flow::one(a),
            (Some(a), Some(b)) => Flow::two(a, b).ok_or(CellCodeError::Duplicate)?,
            (None, Some(_)) => return Err(CellCodeError::SentinelOrder),
        };
        CellCode::new(ground, flow)
    }
}

impl fmt::Display for CellCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let slot = |d: Option<Direction>| d.map_or('-', Direction::as_char);
        write!(
            f,
            "{}{}{}",
            self.ground.as_char(),
            slot(self.flow.0[0]),
            slot(self.flow.0[1])
        )
    }
}

/// Obstacle overlay rejected by the map.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OverlayError {
    #[error("obstacle at {0} lies outside the grid")]
    OutOfBounds(Cell),
    #[error("obstacle at {0} lies on a building cell")]
    OnBuilding(Cell),
}

/// The city map: dense cells, obstacle overlay, lane geometry and spawn sites.
///
/// Immutable once built; obstacle placement returns a new map.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    width: usize,
    height: usize,
    cells: Vec<CellCode>,
    obstacles: BTreeSet<Cell>,
    obstacle_mask: Vec<bool>,
    lane_center_x: Vec<f64>,
    lane_center_y: Vec<f64>,
    walker_sites: Vec<Cell>,
    driver_sites: Vec<Cell>,
    exit_sites: Vec<Cell>,
    parking_sites: Vec<Cell>,
}

impl GridMap {
    /// Builds a map from row-major cells. Panics if `cells.len() != width * height`.
    pub fn new(width: usize, height: usize, cells: Vec<CellCode>) -> GridMap {
        assert_eq!(cells.len(), width * height, "cell count mismatch");
        let mut map = GridMap {
            width,
            height,
            cells,
            obstacles: BTreeSet::new(),
            obstacle_mask: vec![false; width * height],
            lane_center_x: vec![DEFAULT_LANE_CENTER; width],
            lane_center_y: vec![DEFAULT_LANE_CENTER; height],
            walker_sites: Vec::new(),
            driver_sites: Vec::new(),
            exit_sites: Vec::new(),
            parking_sites: Vec::new(),
        };
        map.derive_sites();
        map
    }

    fn derive_sites(&mut self) {
        let ground = |m: &GridMap, c: Cell| m.get(c).ground;
        let mut walker = Vec::new();
        let mut parking = Vec::new();
        for c in self.cells_iter() {
            match ground(self, c) {
                GroundType::Sidewalk
                    if self
                        .neighbors(c)
                        .any(|(_, n)| ground(self, n) == GroundType::Building) =>
                {
                    walker.push(c)
                }
                GroundType::Parking => parking.push(c),
                _ => {}
            }
        }
        let walker_set: BTreeSet<Cell> = walker.iter().copied().collect();
        let mut exits = Vec::new();
        let mut drivers = Vec::new();
        for c in self.cells_iter() {
            let code = self.get(c);
            if code.ground != GroundType::Road || code.flow.is_empty() {
                continue;
            }
            let boundary = c.x == 0 || c.y == 0 || c.x + 1 == self.width || c.y + 1 == self.height;
            let curb = self.neighbors(c).any(|(_, n)| walker_set.contains(&n));
            if boundary {
                exits.push(c);
            }
            if boundary || curb {
                drivers.push(c);
            }
        }
        self.walker_sites = walker;
        self.parking_sites = parking;
        self.exit_sites = exits;
        self.driver_sites = drivers;
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn index(&self, c: Cell) -> usize {
        c.y * self.width + c.x
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new(index % self.width, index / self.width)
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x < self.width && c.y < self.height
    }

    pub fn get(&self, c: Cell) -> &CellCode {
        &self.cells[self.index(c)]
    }

    pub fn ground(&self, c: Cell) -> GroundType {
        self.get(c).ground
    }

    /// Row-major iteration over every coordinate.
    pub fn cells_iter(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| Cell::new(x, y)))
    }

    pub fn codes(&self) -> &[CellCode] {
        &self.cells
    }

    pub fn step(&self, c: Cell, d: Direction) -> Option<Cell> {
        let (dx, dy) = d.delta();
        let x = c.x.checked_add_signed(dx)?;
        let y = c.y.checked_add_signed(dy)?;
        let n = Cell::new(x, y);
        self.contains(n).then_some(n)
    }

    /// In-bounds 4-neighbors in N, E, S, W order.
    pub fn neighbors(&self, c: Cell) -> impl Iterator<Item = (Direction, Cell)> + '_ {
        Direction::ALL
            .into_iter()
            .filter_map(move |d| self.step(c, d).map(|n| (d, n)))
    }

    pub fn is_obstacle(&self, c: Cell) -> bool {
        self.obstacle_mask[self.index(c)]
    }

    pub fn obstacles(&self) -> &BTreeSet<Cell> {
        &self.obstacles
    }

    /// A copy of this map with extra obstacle overlay cells.
    pub fn with_obstacles<I: IntoIterator<Item = Cell>>(&self, cells: I) -> Result<GridMap, OverlayError> {
        let mut map = self.clone();
        for c in cells {
            if !map.contains(c) {
                return Err(OverlayError::OutOfBounds(c));
            }
            if map.ground(c) == GroundType::Building {
                return Err(OverlayError::OnBuilding(c));
            }
            let i = map.index(c);
            map.obstacle_mask[i] = true;
            map.obstacles.insert(c);
        }
        Ok(map)
    }

    /// Same ground, no overlay.
    pub fn without_obstacles(&self) -> GridMap {
        let mut map = self.clone();
        map.obstacles.clear();
        map.obstacle_mask.iter_mut().for_each(|m| *m = false);
        map
    }

    /// Walker traversal cost including the obstacle overlay.
    pub fn walker_cost_at(&self, c: Cell) -> f64 {
        if self.is_obstacle(c) {
            f64::INFINITY
        } else {
            walker_cost(self.get(c))
        }
    }

    pub fn driver_cost_at(&self, c: Cell) -> f64 {
        if self.is_obstacle(c) {
            f64::INFINITY
        } else {
            driver_cost(self.get(c))
        }
    }

    /// Lane-center offset of column `x` (for north/south travel).
    pub fn lane_center_x(&self, x: usize) -> f64 {
        self.lane_center_x[x]
    }

    /// Lane-center offset of row `y` (for east/west travel).
    pub fn lane_center_y(&self, y: usize) -> f64 {
        self.lane_center_y[y]
    }

    /// Building-adjacent sidewalk cells, ground only (the overlay is not applied).
    pub fn walker_sites(&self) -> &[Cell] {
        &self.walker_sites
    }

    /// Road cells on the map boundary or at a curb next to a building.
    pub fn driver_sites(&self) -> &[Cell] {
        &self.driver_sites
    }

    /// Road cells on the map boundary.
    pub fn exit_sites(&self) -> &[Cell] {
        &self.exit_sites
    }

    pub fn parking_sites(&self) -> &[Cell] {
        &self.parking_sites
    }

    pub fn count(&self, ground: GroundType) -> usize {
        self.cells.iter().filter(|c| c.ground == ground).count()
    }

    /// Sidewalk cells in row-major order.
    pub fn sidewalk_cells(&self) -> Vec<Cell> {
        self.cells_iter()
            .filter(|&c| self.ground(c) == GroundType::Sidewalk)
            .collect()
    }

    pub fn cell_of(&self, p: Point) -> Option<Cell> {
        p.cell().filter(|&c| self.contains(c))
    }
}
