use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::model::{JobId, JobState};
use crate::scalar::Scalar;
use crate::time::TimePoint;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("job {0} is already in the ready table")]
    DuplicateJob(JobId),
    #[error("ready table is empty")]
    EmptyTable,
    #[error("stale index: lowest-priority job is {actual}, caller named {requested}")]
    StaleIndex { requested: JobId, actual: JobId },
}

type EdfKey = (TimePoint, TimePoint, JobId);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    pub level: usize,
    pub key: EdfKey,
    pub last_enqueue: TimePoint,
}

/// Multi-level ready structure: one queue per level plus a job-keyed index.
///
/// Level 0 is the highest priority and is kept in EDF order; deeper
/// levels are FIFO.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReadyTable {
    levels: Vec<VecDeque<JobId>>,
    index: BTreeMap<JobId, Entry>,
}

fn key_of<V: Scalar>(job: &JobState<V>) -> EdfKey {
    job.edf_key()
}

impl ReadyTable {
    pub fn new(level_count: usize) -> Self {
        assert!(level_count >= 1);
        ReadyTable { levels: vec![VecDeque::new(); level_count], index: BTreeMap::new() }
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn contains(&self, job: JobId) -> bool {
        self.index.contains_key(&job)
    }

    pub fn level_of(&self, job: JobId) -> Option<usize> {
        self.index.get(&job).map(|e| e.level)
    }

    pub fn entry(&self, job: JobId) -> Option<&Entry> {
        self.index.get(&job)
    }

    pub fn level(&self, level: usize) -> &VecDeque<JobId> {
        &self.levels[level]
    }

    /// Member jobs in ascending id order.
    pub fn jobs(&self) -> impl Iterator<Item = JobId> + '_ {
        self.index.keys().copied()
    }

    fn enqueue(&mut self, job: JobId, entry: Entry) {
        let queue = &mut self.levels[entry.level];
        if entry.level == 0 {
            let index = &self.index;
            let pos = queue.partition_point(|j| index[j].key < entry.key);
            queue.insert(pos, job);
        } else {
            queue.push_back(job);
        }
        self.index.insert(job, entry);
    }

    /// Removes a job from wherever it is.
    pub fn remove(&mut self, job: JobId) -> Option<Entry> {
        let entry = self.index.remove(&job)?;
        let queue = &mut self.levels[entry.level];
        let pos = queue.iter().position(|&j| j == job).expect("index and queues agree");
        queue.remove(pos);
        Some(entry)
    }

    /// Places a newly arrived job at level 0.
    pub fn insert_into_pqueue<V: Scalar>(&mut self, job: &JobState<V>, now: TimePoint) -> Result<(), TableError> {
        if self.contains(job.id()) {
            return Err(TableError::DuplicateJob(job.id()));
        }
        self.enqueue(job.id(), Entry { level: 0, key: key_of(job), last_enqueue: now });
        Ok(())
    }

    /// Urgency promotion: moves the job to level 0 whatever its current level.
    pub fn add_at_front<V: Scalar>(&mut self, job: &JobState<V>, now: TimePoint) {
        let previous = self.remove(job.id());
        let last_enqueue = match previous {
            Some(e) if e.level == 0 => e.last_enqueue,
            _ => now,
        };
        self.enqueue(job.id(), Entry { level: 0, key: key_of(job), last_enqueue });
    }

    /// Removes the lowest-priority job: the tail of the lowest non-empty
    /// level. `index` must name that job.
    pub fn remove_at_end(&mut self, index: JobId) -> Result<JobId, TableError> {
        let actual = self.lowest().ok_or(TableError::EmptyTable)?;
        if actual != index {
            return Err(TableError::StaleIndex { requested: index, actual });
        }
        self.remove(actual);
        Ok(actual)
    }

    /// Tail of the lowest non-empty level.
    pub fn lowest(&self) -> Option<JobId> {
        self.levels.iter().rev().find_map(|q| q.back().copied())
    }

    /// Head of the highest non-empty level.
    pub fn head(&self) -> Option<(JobId, usize)> {
        self.levels.iter().enumerate().find_map(|(l, q)| q.front().map(|&j| (j, l)))
    }

    /// Head of the highest non-empty level, ignoring `skip`.
    pub fn head_excluding(&self, skip: JobId) -> Option<(JobId, usize)> {
        self.levels.iter().enumerate().find_map(|(l, q)| q.iter().find(|&&j| j != skip).map(|&j| (j, l)))
    }

    /// Moves a job to the tail of `level` (EDF position at level 0).
    pub fn move_to(&mut self, job: JobId, level: usize, now: TimePoint) {
        let level = level.min(self.level_count() - 1);
        if let Some(mut e) = self.remove(job) {
            e.level = level;
            e.last_enqueue = now;
            self.enqueue(job, e);
        }
    }

    /// Changes the level count; jobs on removed levels move, in order, to
    /// the new lowest level.
    pub fn resize(&mut self, level_count: usize) {
        assert!(level_count >= 1);
        if level_count >= self.levels.len() {
            self.levels.resize(level_count, VecDeque::new());
            return;
        }
        let overflow: Vec<JobId> = self.levels.drain(level_count..).flatten().collect();
        let bottom = level_count - 1;
        for job in overflow {
            let mut e = self.index.remove(&job).expect("index and queues agree");
            e.level = bottom;
            self.enqueue(job, e);
        }
    }

    /// Structural invariants: index/queue bijection, levels in range,
    /// level 0 in EDF order.
    pub fn check(&self) -> Result<(), String> {
        let mut seen = 0;
        for (l, q) in self.levels.iter().enumerate() {
            for &j in q {
                seen += 1;
                match self.index.get(&j) {
                    Some(e) if e.level == l => {}
                    Some(e) => return Err(format!("job {j} queued at {l} but indexed at {}", e.level)),
                    None => return Err(format!("job {j} queued at {l} but not indexed")),
                }
            }
        }
        if seen != self.index.len() {
            return Err(format!("{seen} queued entries for {} indexed jobs", self.index.len()));
        }
        let level0: Vec<_> = self.levels[0].iter().map(|j| self.index[j].key).collect();
        if level0.windows(2).any(|w| w[0] > w[1]) {
            return Err("level 0 not in EDF order".to_string());
        }
        Ok(())
    }
}
