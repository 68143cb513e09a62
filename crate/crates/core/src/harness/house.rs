//! A synthetic two-storey single-family house and a camera tour through it.

use std::fs;
use std::io;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::frames::{write_frames, Frame};
use crate::lang::{Action, TimeOfDay};
use crate::space::{Box3, Point3, SpaceRecord, SpaceRegistry};

/// The three example policies for the house, as written by hand.
pub const HOUSE_POLICIES: &str = r#"Begin
Name: "GrantAliceAllAccess"
Effect: allow
Principal: "Alice"
Action: read
Space:    "first_floor_all" Or "second_floor_all"
       Or "staircase"
End

Begin
Name: "GrantBobAccessToGuestArea"
Effect: allow
Principal: "Bob"
Action: read
Space: recreation_area Or small_bedroom_2
Condition: UserInside: "second_floor_all"
           And TODAfter: 0900
End

Begin
Name: "DenyAccessToBathroom"
Effect: deny
Space:    "guest_bathroom" Or "shared_bathroom"
       Or "master_bathroom"
End
"#;

pub const TOUR_FRAMES_PER_ROOM: usize = 16;
pub const MIN_POINTS_PER_FRAME: usize = 100;
pub const MAX_POINTS_PER_FRAME: usize = 1000;
const WALL_MARGIN: f64 = 0.05;

const FIRST_FLOOR: (f64, f64) = (0.0, 3.0);
const SECOND_FLOOR: (f64, f64) = (3.0, 6.0);

/// `(id, parent, [lx, rx, ly, ry])`; leaves of one storey share its z range.
const FIRST_FLOOR_ROOMS: &[(&str, &str, [f64; 4])] = &[
    ("living_room", "first_floor_all", [0.0, 6.0, 0.0, 5.0]),
    ("kitchen", "first_floor_all", [6.0, 10.0, 0.0, 5.0]),
    ("dining_room", "first_floor_all", [0.0, 4.0, 5.0, 10.0]),
    ("foyer", "first_floor_all", [4.0, 7.0, 5.0, 10.0]),
    ("guest_bathroom", "first_floor_all", [7.0, 10.0, 5.0, 7.5]),
    ("guest_bedroom", "first_floor_all", [7.0, 10.0, 7.5, 10.0]),
];

const SECOND_FLOOR_ROOMS: &[(&str, &str, [f64; 4])] = &[
    ("recreation_area", "second_floor_all", [0.0, 5.0, 0.0, 5.0]),
    ("small_bedroom_1", "second_floor_all", [5.0, 7.5, 0.0, 5.0]),
    ("small_bedroom_2", "second_floor_all", [7.5, 10.0, 0.0, 5.0]),
    ("shared_bathroom", "second_floor_all", [0.0, 3.0, 5.0, 10.0]),
    ("master_bedroom", "master_suite", [3.0, 8.0, 5.0, 10.0]),
    ("master_closet", "master_suite", [8.0, 10.0, 5.0, 7.5]),
    ("master_bathroom", "master_suite", [8.0, 10.0, 7.5, 10.0]),
];

/// House, floors, staircase, master suite and thirteen rooms.
pub fn house_spaces() -> Vec<SpaceRecord> {
    let mut out = vec![
        SpaceRecord::new("house", Box3::new(0.0, 12.0, 0.0, 10.0, 0.0, 6.0), None),
        SpaceRecord::new("first_floor_all", Box3::new(0.0, 10.0, 0.0, 10.0, 0.0, 3.0), Some("house")),
        SpaceRecord::new("second_floor_all", Box3::new(0.0, 10.0, 0.0, 10.0, 3.0, 6.0), Some("house")),
        SpaceRecord::new("staircase", Box3::new(10.0, 12.0, 0.0, 10.0, 0.0, 6.0), Some("house")),
        SpaceRecord::new(
            "master_suite",
            Box3::new(3.0, 10.0, 5.0, 10.0, SECOND_FLOOR.0, SECOND_FLOOR.1),
            Some("second_floor_all"),
        ),
    ];
    for (rooms, (lz, rz)) in [(FIRST_FLOOR_ROOMS, FIRST_FLOOR), (SECOND_FLOOR_ROOMS, SECOND_FLOOR)] {
        for (id, parent, [lx, rx, ly, ry]) in rooms {
            out.push(SpaceRecord::new(*id, Box3::new(*lx, *rx, *ly, *ry, lz, rz), Some(parent)));
        }
    }
    out
}

pub fn house_registry() -> SpaceRegistry {
    SpaceRegistry::load(house_spaces()).expect("house geometry is a valid hierarchy")
}

/// Leaf rooms in tour order: the first floor, the staircase, then the second floor.
pub fn tour_rooms() -> Vec<&'static str> {
    FIRST_FLOOR_ROOMS
        .iter()
        .map(|r| r.0)
        .chain(std::iter::once("staircase"))
        .chain(SECOND_FLOOR_ROOMS.iter().map(|r| r.0))
        .collect()
}

#[derive(Clone, Debug)]
pub struct HouseDataset {
    pub registry: SpaceRegistry,
    pub policies: String,
    pub frames: Vec<Frame>,
}

impl HouseDataset {
    /// Writes `spaces.json`, `policies.vmac` and `requests.jsonl` into `dir`.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("spaces.json"), self.registry.to_json() + "\n")?;
        fs::write(dir.join("policies.vmac"), &self.policies)?;
        let mut file = io::BufWriter::new(fs::File::create(dir.join("requests.jsonl"))?);
        write_frames(&mut file, &self.frames)?;
        io::Write::flush(&mut file)
    }
}

fn sample_in(rng: &mut ChaCha8Rng, b: &Box3) -> Point3 {
    std::array::from_fn(|axis| {
        let v = rng.gen_range(b.min[axis] + WALL_MARGIN..=b.max[axis] - WALL_MARGIN);
        (v * 1000.0).round() / 1000.0
    })
}

fn advance(t: TimeOfDay, minutes: u16) -> TimeOfDay {
    let total = (t.value() / 100) * 60 + t.value() % 100 + minutes;
    let total = total.min(24 * 60);
    TimeOfDay::new((total / 60) * 100 + total % 60).expect("clamped to the day")
}

/// The house with its example policies and a deterministic tour.
///
/// The tour spends [`TOUR_FRAMES_PER_ROOM`] frames in each leaf room. A frame
/// is taken from a point in the current room and sees that room plus, half
/// of the time, one other room of the same storey. Principals alternate
/// between Alice and Bob; the clock starts at 08:00 and advances five
/// minutes every other frame.
pub fn generate_house(seed: u64) -> HouseDataset {
    let registry = house_registry();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rooms = tour_rooms();
    let storey = |id: &str| {
        let b = registry.box_of(id).unwrap();
        if b.max[2] <= FIRST_FLOOR.1 {
            1
        } else if b.min[2] >= SECOND_FLOOR.0 {
            2
        } else {
            0
        }
    };

    let mut frames = Vec::with_capacity(rooms.len() * TOUR_FRAMES_PER_ROOM);
    let mut time = TimeOfDay::new(800).unwrap();
    for room in &rooms {
        let room_box = registry.box_of(room).unwrap();
        let neighbours: Vec<&str> = rooms
            .iter()
            .copied()
            .filter(|r| r != room && storey(r) == storey(room))
            .collect();
        for _ in 0..TOUR_FRAMES_PER_ROOM {
            let k = frames.len();
            let user_location = sample_in(&mut rng, &room_box);
            let other = if rng.gen_bool(0.5) {
                neighbours.choose(&mut rng).and_then(|r| registry.box_of(r))
            } else {
                None
            };
            let n = rng.gen_range(MIN_POINTS_PER_FRAME..=MAX_POINTS_PER_FRAME);
            let points = (0..n)
                .map(|_| match other {
                    Some(b) if rng.gen_bool(0.25) => sample_in(&mut rng, &b),
                    _ => sample_in(&mut rng, &room_box),
                })
                .collect();
            frames.push(Frame {
                principal: if k % 2 == 0 { "Alice" } else { "Bob" }.to_string(),
                action: if k % 7 == 6 { Action::Write } else { Action::Read },
                user_location,
                time,
                points,
            });
            if k % 2 == 1 {
                time = advance(time, 5);
            }
        }
    }
    HouseDataset {
        registry,
        policies: HOUSE_POLICIES.to_string(),
        frames,
    }
}
