use super::run::{build_simulation, CommandTape, Overrides, TapeEntry};
use super::scenario::Scenario;
use super::wire::{apply_client_frame, check_client_frame, state_frame, ClientFrame, StateFrame, WireError};
use super::HarnessError;
use crate::sim::{Simulation, TickRecord};

/// A live simulation driven by client frames. Frames are queued and applied
/// together at the next tick boundary; every applied frame is taped so the
/// run can be replayed in batch mode.
#[derive(Debug, Clone)]
pub struct Session {
    sim: Simulation,
    pending: Vec<ClientFrame>,
    tape: CommandTape,
}

impl Session {
    pub fn new(scenario: &Scenario, overrides: &Overrides) -> Result<Self, HarnessError> {
        let (sim, _) = build_simulation(scenario, overrides)?;
        Ok(Self {
            sim,
            pending: Vec::new(),
            tape: CommandTape::default(),
        })
    }

    pub fn simulation(&self) -> &Simulation {
        &self.sim
    }

    pub fn tape(&self) -> &CommandTape {
        &self.tape
    }

    /// Checks a frame and queues it. Invalid frames are refused without
    /// touching the queue.
    pub fn submit(&mut self, frame: ClientFrame) -> Result<(), WireError> {
        check_client_frame(&self.sim, &frame)?;
        self.pending.push(frame);
        Ok(())
    }

    /// Applies queued frames, then runs one tick.
    pub fn step(&mut self) -> Result<(TickRecord, StateFrame), HarnessError> {
        let tick = self.sim.tick_count();
        for frame in self.pending.drain(..) {
            if apply_client_frame(&mut self.sim, &frame).is_ok() {
                self.tape.entries.push(TapeEntry { tick, frame });
            }
        }
        let record = self.sim.tick()?;
        self.tape.span = self.sim.tick_count();
        let frame = state_frame(&self.sim, &record);
        Ok((record, frame))
    }
}
