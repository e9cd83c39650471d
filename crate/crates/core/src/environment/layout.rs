//! Procedural block layout.
//!
//! A layout is a lattice of square blocks separated by street corridors, with
//! a corridor around the outer perimeter as well. Each block is a building
//! wrapped in a one-cell sidewalk ring. Each corridor carries
//! `lanes_per_direction` lanes each way with right-hand traffic, so the two
//! opposing center lanes are adjacent. Corridors cross in intersection squares
//! whose cells advertise both crossing flows; a zebra band spans the street on
//! every approach, aligned with the sidewalk rows of the neighbouring blocks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Cell, CellCode, Direction, Flow, GridMap, GroundType};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("layout needs at least one block in each direction")]
    NoBlocks,
    #[error("building_side + 2 must equal block_side (got building {building}, block {block})")]
    RingWidth { block: usize, building: usize },
    #[error("building_side must be at least 1")]
    NoBuilding,
    #[error("lanes_per_direction must be at least 1")]
    NoLanes,
}

fn default_lanes() -> usize {
    2
}

fn default_block_side() -> usize {
    15
}

fn default_building_side() -> usize {
    13
}

/// Parameters of a procedurally generated city.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSpec {
    pub blocks_x: usize,
    pub blocks_y: usize,
    #[serde(default = "default_block_side")]
    pub block_side: usize,
    #[serde(default = "default_building_side")]
    pub building_side: usize,
    #[serde(default = "default_lanes")]
    pub lanes_per_direction: usize,
    /// Put a parking cell in the curb lane at the middle of every block side.
    #[serde(default)]
    pub parking_bays: bool,
}

impl LayoutSpec {
    /// Blocks of 15×15 cells with 13×13 buildings and two lanes each way.
    pub fn standard(blocks_x: usize, blocks_y: usize) -> LayoutSpec {
        LayoutSpec {
            blocks_x,
            blocks_y,
            block_side: 15,
            building_side: 13,
            lanes_per_direction: 2,
            parking_bays: false,
        }
    }

    pub fn validate(&self) -> Result<(), LayoutError> {
        if self.blocks_x == 0 || self.blocks_y == 0 {
            return Err(LayoutError::NoBlocks);
        }
        if self.building_side == 0 {
            return Err(LayoutError::NoBuilding);
        }
        if self.building_side + 2 != self.block_side {
            return Err(LayoutError::RingWidth {
                block: self.block_side,
                building: self.building_side,
            });
        }
        if self.lanes_per_direction == 0 {
            return Err(LayoutError::NoLanes);
        }
        Ok(())
    }

    pub fn corridor_width(&self) -> usize {
        2 * self.lanes_per_direction
    }

    fn pitch(&self) -> usize {
        self.block_side + self.corridor_width()
    }

    pub fn width(&self) -> usize {
        self.blocks_x * self.block_side + (self.blocks_x + 1) * self.corridor_width()
    }

    pub fn height(&self) -> usize {
        self.blocks_y * self.block_side + (self.blocks_y + 1) * self.corridor_width()
    }

    pub fn block_count(&self) -> usize {
        self.blocks_x * self.blocks_y
    }

    /// North-west cell of block `(bx, by)`.
    pub fn block_origin(&self, bx: usize, by: usize) -> Cell {
        let cw = self.corridor_width();
        Cell::new(cw + bx * self.pitch(), cw + by * self.pitch())
    }

    /// Sidewalk ring cells of one block, row-major.
    pub fn block_sidewalks(&self, bx: usize, by: usize) -> Vec<Cell> {
        let o = self.block_origin(bx, by);
        let b = self.block_side;
        let mut out = Vec::with_capacity(4 * b - 4);
        for v in 0..b {
            for u in 0..b {
                if u == 0 || v == 0 || u + 1 == b || v + 1 == b {
                    out.push(Cell::new(o.x + u, o.y + v));
                }
            }
        }
        out
    }

    /// The block plus the near half of every street around it, as
    /// `(min, max_exclusive)`. Regions of different blocks do not overlap.
    pub fn block_region(&self, bx: usize, by: usize) -> (Cell, Cell) {
        let o = self.block_origin(bx, by);
        let l = self.lanes_per_direction;
        (
            Cell::new(o.x - l, o.y - l),
            Cell::new(o.x + self.block_side + l, o.y + self.block_side + l),
        )
    }

    /// Position of a coordinate along one axis.
    fn axis(&self, v: usize) -> Axis {
        let off = v % self.pitch();
        let cw = self.corridor_width();
        if off < cw {
            Axis::Corridor(off)
        } else {
            Axis::Block(off - cw)
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Axis {
    /// Offset inside a street corridor, counted from its west / north edge.
    Corridor(usize),
    /// Offset inside a block band.
    Block(usize),
}

/// Builds the city described by `spec`. Obstacles are placed separately.
pub fn generate_layout(spec: &LayoutSpec) -> Result<GridMap, LayoutError> {
    spec.validate()?;
    let (w, h) = (spec.width(), spec.height());
    let l = spec.lanes_per_direction;
    let cw = spec.corridor_width();
    let b = spec.block_side;
    // West half of a north-south street flows south, east half north.
    let vertical_flow = |k: usize| if k < l { Direction::South } else { Direction::North };
    // North half of an east-west street flows west, south half east.
    let horizontal_flow = |m: usize| if m < l { Direction::West } else { Direction::East };
    // Outermost lane of a corridor that borders a block (not the map edge).
    let curb = |k: usize, corridor: usize, blocks: usize| {
        (k + 1 == cw && corridor < blocks) || (k == 0 && corridor > 0)
    };

    let mut cells = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let code = match (spec.axis(x), spec.axis(y)) {
                (Axis::Corridor(k), Axis::Corridor(m)) => {
                    let outer = k == 0 || m == 0 || k + 1 == cw || m + 1 == cw;
                    let ground = if outer {
                        GroundType::TurnCell
                    } else {
                        GroundType::LeftTurnCell
                    };
                    let flow = Flow::two(vertical_flow(k), horizontal_flow(m)).expect("distinct axes");
                    CellCode { ground, flow }
                }
                (Axis::Corridor(k), Axis::Block(v)) => {
                    let d = vertical_flow(k);
                    if v == 0 || v + 1 == b {
                        CellCode::lane(GroundType::Zebra, d)
                    } else if spec.parking_bays && v == b / 2 && curb(k, x / spec.pitch(), spec.blocks_x) {
                        CellCode::lane(GroundType::Parking, d)
                    } else {
                        CellCode::lane(GroundType::Road, d)
                    }
                }
                (Axis::Block(u), Axis::Corridor(m)) => {
                    let d = horizontal_flow(m);
                    if u == 0 || u + 1 == b {
                        CellCode::lane(GroundType::Zebra, d)
                    } else if spec.parking_bays && u == b / 2 && curb(m, y / spec.pitch(), spec.blocks_y) {
                        CellCode::lane(GroundType::Parking, d)
                    } else {
                        CellCode::lane(GroundType::Road, d)
                    }
                }
                (Axis::Block(u), Axis::Block(v)) => {
                    if u == 0 || v == 0 || u + 1 == b || v + 1 == b {
                        CellCode::bare(GroundType::Sidewalk)
                    } else {
                        CellCode::bare(GroundType::Building)
                    }
                }
            };
            cells.push(code);
        }
    }
    Ok(GridMap::new(w, h, cells))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_five_by_five() {
        let spec = LayoutSpec::standard(5, 5);
        let g = generate_layout(&spec).unwrap();
        assert_eq!((g.width(), g.height()), (99, 99));
        assert_eq!(g.count(GroundType::Building), 25 * 13 * 13);
        assert_eq!(g.count(GroundType::Sidewalk), 25 * (4 * 15 - 4));
        for by in 0..5 {
            for bx in 0..5 {
                let o = spec.block_origin(bx, by);
                for v in 0..15 {
                    for u in 0..15 {
                        let ring = u == 0 || v == 0 || u == 14 || v == 14;
                        let want = if ring { GroundType::Sidewalk } else { GroundType::Building };
                        assert_eq!(g.ground(Cell::new(o.x + u, o.y + v)), want);
                    }
                }
            }
        }
    }

    #[test]
    fn single_block_ring() {
        let g = generate_layout(&LayoutSpec::standard(1, 1)).unwrap();
        assert_eq!(g.count(GroundType::Sidewalk), 56);
        assert_eq!(g.count(GroundType::Building), 169);
        assert_eq!(g.width(), 15 + 2 * 4);
    }

    #[test]
    fn interior_street_has_four_lanes() {
        let spec = LayoutSpec::standard(2, 1);
        let g = generate_layout(&spec).unwrap();
        // Corridor between the two blocks, sampled at the middle row of the blocks.
        let y = spec.block_origin(0, 0).y + 7;
        let x0 = spec.block_origin(0, 0).x + 15;
        assert_eq!(x0 + 4, spec.block_origin(1, 0).x);
        let flows: Vec<Direction> = (x0..x0 + 4)
            .map(|x| {
                let c = g.get(Cell::new(x, y));
                assert_eq!(c.ground, GroundType::Road);
                assert_eq!(c.flow.len(), 1);
                c.flow.first().unwrap()
            })
            .collect();
        assert_eq!(
            flows,
            vec![Direction::South, Direction::South, Direction::North, Direction::North]
        );
    }

    #[test]
    fn zebras_align_with_sidewalk_rows() {
        let spec = LayoutSpec::standard(2, 2);
        let g = generate_layout(&spec).unwrap();
        let o = spec.block_origin(0, 0);
        // Bottom sidewalk row of block (0,0) continues east as a zebra band.
        let y = o.y + 14;
        for x in o.x + 15..o.x + 19 {
            assert_eq!(g.ground(Cell::new(x, y)), GroundType::Zebra);
        }
        assert_eq!(g.ground(Cell::new(o.x + 19, y)), GroundType::Sidewalk);
        // Just inside the intersection the cells are turn cells with two flows.
        let t = g.get(Cell::new(o.x + 15, y + 1));
        assert!(t.ground.is_turn());
        assert_eq!(t.flow.len(), 2);
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = LayoutSpec::standard(1, 1);
        s.building_side = 14;
        assert_eq!(
            generate_layout(&s),
            Err(LayoutError::RingWidth { block: 15, building: 14 })
        );
        let mut s = LayoutSpec::standard(0, 1);
        assert_eq!(generate_layout(&s), Err(LayoutError::NoBlocks));
        s = LayoutSpec::standard(1, 1);
        s.lanes_per_direction = 0;
        assert_eq!(generate_layout(&s), Err(LayoutError::NoLanes));
    }

    #[test]
    fn driver_sites_are_flowing_roads() {
        let g = generate_layout(&LayoutSpec::standard(2, 2)).unwrap();
        assert!(!g.driver_sites().is_empty());
        for &c in g.driver_sites() {
            assert_eq!(g.ground(c), GroundType::Road);
            assert!(!g.get(c).flow.is_empty());
        }
        assert!(!g.exit_sites().is_empty());
        // Walker sites: ring minus the four corners.
        assert_eq!(g.walker_sites().len(), 4 * (56 - 4));
    }

    #[test]
    fn parking_bays_in_curb_lanes() {
        let mut s = LayoutSpec::standard(1, 1);
        s.parking_bays = true;
        let g = generate_layout(&s).unwrap();
        assert_eq!(g.count(GroundType::Parking), 4);
        assert_eq!(g.parking_sites().len(), 4);
    }

    #[test]
    fn regions_tile_without_overlap() {
        let spec = LayoutSpec::standard(3, 2);
        let mut seen = vec![0u8; spec.width() * spec.height()];
        for by in 0..2 {
            for bx in 0..3 {
                let (lo, hi) = spec.block_region(bx, by);
                for y in lo.y..hi.y {
                    for x in lo.x..hi.x {
                        seen[y * spec.width() + x] += 1;
                    }
                }
            }
        }
        assert!(seen.iter().all(|&n| n <= 1));
    }
}
