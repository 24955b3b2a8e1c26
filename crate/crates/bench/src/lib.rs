//! Shared fixtures for the kernel benchmarks.

use oddm_core::channel::{draw_usable_channel, ProfileSpec};
use oddm_core::modem::{Link, Transceiver};
use oddm_core::{ChannelRealization, DDFrame, GridConfig, SeedPlan, StreamTag, TimeSequence};

pub struct Fixture {
    pub kit: Transceiver,
    pub channel: ChannelRealization,
    pub bits: Vec<u8>,
    pub frame: DDFrame,
    pub time: TimeSequence,
}

/// One EVA frame of 4-QAM on `grid` with a fixed seed.
pub fn fixture(grid: GridConfig) -> Fixture {
    let kit = Transceiver::new(&grid, 4, Link::default()).expect("valid grid");
    let plan = SeedPlan::new(42);
    let (channel, _) = draw_usable_channel(&ProfileSpec::eva(), &grid, &mut plan.derive_stream(0, StreamTag::CHANNEL))
        .expect("EVA fits the grid");
    let bits = kit.qam.random_bits(grid.frame_len(), &mut plan.derive_stream(0, StreamTag::BITS));
    let symbols = kit.qam.map_bits(&bits).expect("whole symbols");
    let frame = DDFrame::devectorize(&symbols, grid.m_delay, grid.n_doppler).expect("frame shape");
    let time = kit.modem.modulate(&frame).expect("frame matches grid");
    Fixture { kit, channel, bits, frame, time }
}
