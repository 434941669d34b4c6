use std::ops::{Deref, DerefMut};
use std::sync::{Condvar, Mutex};

use super::ProofChecker;

/// Sessions leased to one pipeline at a time.
pub struct SessionPool {
    idle: Mutex<Vec<Box<dyn ProofChecker>>>,
    returned: Condvar,
    size: usize,
}

impl SessionPool {
    pub fn new(sessions: Vec<Box<dyn ProofChecker>>) -> Self {
        let size = sessions.len();
        Self { idle: Mutex::new(sessions), returned: Condvar::new(), size }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Blocks until a session is free.
    pub fn lease(&self) -> Lease<'_> {
        let mut idle = self.idle.lock().unwrap_or_else(|e| e.into_inner());
        loop {
            if let Some(session) = idle.pop() {
                return Lease { pool: self, session: Some(session) };
            }
            idle = self.returned.wait(idle).unwrap_or_else(|e| e.into_inner());
        }
    }
}

pub struct Lease<'a> {
    pool: &'a SessionPool,
    session: Option<Box<dyn ProofChecker>>,
}

impl Deref for Lease<'_> {
    type Target = dyn ProofChecker;

    fn deref(&self) -> &Self::Target {
        self.session.as_deref().expect("lease holds a session until dropped")
    }
}

impl DerefMut for Lease<'_> {
    fn deref_mut(&mut self) -> &mut Self::Target {
        self.session.as_deref_mut().expect("lease holds a session until dropped")
    }
}

impl Drop for Lease<'_> {
    fn drop(&mut self) {
        if let Some(s) = self.session.take() {
            self.pool.idle.lock().unwrap_or_else(|e| e.into_inner()).push(s);
            self.pool.returned.notify_one();
        }
    }
}
