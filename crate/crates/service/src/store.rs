//! In-memory game sessions with an optional move journal.
//!
//! Each session sits behind its own mutex, so moves on one session are
//! serialized while different sessions proceed independently. A client may
//! pass the turn number it believes it is playing; a stale turn is rejected,
//! which makes "one successful move per turn" hold even when several
//! clients race on the same position.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use fibquilt::analysis::{solve_winner, SearchBudget, WinnerSolution};
use fibquilt::replay::MoveLog;
use fibquilt::{Error as CoreError, GameState, IllegalReason, MoveDescriptor, Player};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub max_n: u64,
    pub solver_budget: SearchBudget,
    pub journal_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            max_n: 500,
            solver_budget: SearchBudget::new(1_000_000),
            journal_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Random,
    GreedyMonovariant,
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Active,
    Finished,
}

/// Reasons a move request conflicts with the session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConflictReason {
    NotApplicable,
    Gated,
    Finished,
    StaleTurn,
}

impl From<IllegalReason> for ConflictReason {
    fn from(r: IllegalReason) -> Self {
        match r {
            IllegalReason::NotApplicable => ConflictReason::NotApplicable,
            IllegalReason::Gated => ConflictReason::Gated,
        }
    }
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("{0}")]
    BadRequest(String),
    #[error("no session with id {0}")]
    NotFound(String),
    #[error("{message}")]
    Conflict {
        reason: ConflictReason,
        message: String,
    },
    #[error("{0}")]
    Unavailable(String),
    #[error("journal error: {0}")]
    Journal(#[from] std::io::Error),
    #[error("{0}")]
    Internal(String),
}

pub type SessionResult<T> = Result<T, SessionError>;

#[derive(Debug)]
struct Session {
    id: String,
    n: u64,
    seed: u64,
    state: GameState,
    history: Vec<MoveDescriptor>,
    journal: Option<File>,
}

impl Session {
    fn is_finished(&self) -> bool {
        self.state.is_terminal()
    }

    fn view(&self) -> SessionView {
        let finished = self.is_finished();
        SessionView {
            id: self.id.clone(),
            n: self.n,
            seed: self.seed,
            state: self.state.to_string(),
            terms: self
                .state
                .entries()
                .map(|(index, multiplicity)| TermView {
                    index,
                    value: fibquilt::q(index),
                    multiplicity,
                })
                .collect(),
            total: self.state.total(),
            monovariant: self.state.monovariant(),
            history: self.history.iter().map(ToString::to_string).collect(),
            turn: self.history.len(),
            to_move: Player::to_move(self.history.len()),
            status: if finished {
                Status::Finished
            } else {
                Status::Active
            },
            winner: finished.then(|| Player::winner_for_length(self.history.len())),
        }
    }

    fn play(&mut self, mv: MoveDescriptor, turn: Option<usize>) -> SessionResult<()> {
        if self.is_finished() {
            return Err(SessionError::Conflict {
                reason: ConflictReason::Finished,
                message: "the game is already finished".into(),
            });
        }
        if let Some(t) = turn {
            if t != self.history.len() {
                return Err(SessionError::Conflict {
                    reason: ConflictReason::StaleTurn,
                    message: format!(
                        "move was sent for turn {t} but the session is at turn {}",
                        self.history.len()
                    ),
                });
            }
        }
        let next = self.state.apply(&mv).map_err(|e| match e {
            CoreError::IllegalMove { reason, .. } => SessionError::Conflict {
                reason: reason.into(),
                message: format!("{mv}: {reason}"),
            },
            other => SessionError::Internal(other.to_string()),
        })?;
        if let Some(journal) = self.journal.as_mut() {
            writeln!(journal, "{mv}")?;
            journal.flush()?;
        }
        self.state = next;
        self.history.push(mv);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermView {
    pub index: usize,
    pub value: u64,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionView {
    pub id: String,
    pub n: u64,
    pub seed: u64,
    pub state: String,
    pub terms: Vec<TermView>,
    pub total: u64,
    pub monovariant: f64,
    pub history: Vec<String>,
    pub turn: usize,
    pub to_move: Player,
    pub status: Status,
    pub winner: Option<Player>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoveView {
    #[serde(rename = "move")]
    pub mv: String,
    pub rewrite: String,
    pub monovariant_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MovesView {
    pub moves: Vec<MoveView>,
    /// The only legal move is R2a.
    pub gated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineMoveView {
    pub strategy: Strategy,
    pub chosen: String,
    pub session: SessionView,
}

#[derive(Default)]
pub struct SessionStore {
    config: ServiceConfig,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    solutions: Mutex<HashMap<u64, Arc<WinnerSolution>>>,
}

impl SessionStore {
    pub fn new(config: ServiceConfig) -> SessionResult<Self> {
        if let Some(dir) = &config.journal_dir {
            fs::create_dir_all(dir)?;
        }
        Ok(Self {
            config,
            sessions: RwLock::default(),
            solutions: Mutex::default(),
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    fn journal_path(dir: &Path, id: &str) -> PathBuf {
        dir.join(format!("{id}.log"))
    }

    pub fn create(&self, n: u64, seed: Option<u64>) -> SessionResult<SessionView> {
        if n == 0 || n > self.config.max_n {
            return Err(SessionError::BadRequest(format!(
                "n must be between 1 and {}, got {n}",
                self.config.max_n
            )));
        }
        let state = GameState::initial(n).map_err(|e| SessionError::BadRequest(e.to_string()))?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let seed = seed.unwrap_or_else(rand::random);
        let journal = match &self.config.journal_dir {
            Some(dir) => {
                let mut file = File::create(Self::journal_path(dir, &id))?;
                write!(file, "# seed={seed}\n{}", MoveLog::new(n).header())?;
                file.flush()?;
                Some(file)
            }
            None => None,
        };
        let session = Session {
            id: id.clone(),
            n,
            seed,
            state,
            history: Vec::new(),
            journal,
        };
        let view = session.view();
        self.sessions
            .write()
            .unwrap()
            .insert(id, Arc::new(Mutex::new(session)));
        Ok(view)
    }

    /// Reloads every journal in the configured directory.
    pub fn recover(&self) -> SessionResult<usize> {
        let Some(dir) = self.config.journal_dir.clone() else {
            return Ok(0);
        };
        let mut recovered = 0;
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("log") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_owned) else {
                continue;
            };
            let text = fs::read_to_string(&path)?;
            let log = MoveLog::parse(&text)
                .map_err(|e| SessionError::Internal(format!("{}: {e}", path.display())))?;
            let seed = text
                .lines()
                .find_map(|l| l.trim().strip_prefix("# seed="))
                .and_then(|s| s.trim().parse().ok())
                .unwrap_or(0);
            let state = log
                .state()
                .map_err(|e| SessionError::Internal(format!("{}: {e}", path.display())))?;
            let journal = OpenOptions::new().append(true).open(&path)?;
            let session = Session {
                id: id.clone(),
                n: log.n,
                seed,
                state,
                history: log.moves,
                journal: Some(journal),
            };
            self.sessions
                .write()
                .unwrap()
                .insert(id, Arc::new(Mutex::new(session)));
            recovered += 1;
        }
        Ok(recovered)
    }

    fn session(&self, id: &str) -> SessionResult<Arc<Mutex<Session>>> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::NotFound(id.to_owned()))
    }

    pub fn get(&self, id: &str) -> SessionResult<SessionView> {
        let session = self.session(id)?;
        let guard = session.lock().unwrap();
        Ok(guard.view())
    }

    pub fn list_moves(&self, id: &str) -> SessionResult<MovesView> {
        let session = self.session(id)?;
        let guard = session.lock().unwrap();
        let legal = guard.state.legal_moves();
        let gated = legal.len() == 1 && legal[0].rule() == fibquilt::Rule::R2a;
        Ok(MovesView {
            moves: legal
                .iter()
                .map(|m| MoveView {
                    mv: m.to_string(),
                    rewrite: m.rewrite_text(),
                    monovariant_delta: m.monovariant_delta(),
                })
                .collect(),
            gated,
        })
    }

    pub fn play(&self, id: &str, mv: &str, turn: Option<usize>) -> SessionResult<SessionView> {
        let mv: MoveDescriptor = mv
            .parse()
            .map_err(|e: CoreError| SessionError::BadRequest(e.to_string()))?;
        let session = self.session(id)?;
        let mut guard = session.lock().unwrap();
        guard.play(mv, turn)?;
        Ok(guard.view())
    }

    fn solution(&self, n: u64) -> SessionResult<Arc<WinnerSolution>> {
        if let Some(sol) = self.solutions.lock().unwrap().get(&n) {
            return Ok(sol.clone());
        }
        let sol = match solve_winner(n, self.config.solver_budget) {
            Ok(sol) => Arc::new(sol),
            Err(CoreError::ResourceLimit { budget, .. }) => {
                return Err(SessionError::Unavailable(format!(
                    "the optimal solver exceeds its {budget}-state budget for n = {n}; \
                     use strategy random or greedy-monovariant"
                )))
            }
            Err(e) => return Err(SessionError::Internal(e.to_string())),
        };
        self.solutions.lock().unwrap().insert(n, sol.clone());
        Ok(sol)
    }

    pub fn engine_move(
        &self,
        id: &str,
        strategy: Strategy,
        turn: Option<usize>,
    ) -> SessionResult<EngineMoveView> {
        let session = self.session(id)?;
        let n = session.lock().unwrap().n;
        let solution = match strategy {
            Strategy::Optimal => Some(self.solution(n)?),
            _ => None,
        };
        let mut guard = session.lock().unwrap();
        let legal = guard.state.legal_moves();
        if legal.is_empty() {
            return Err(SessionError::Conflict {
                reason: ConflictReason::Finished,
                message: "the game is already finished".into(),
            });
        }
        let chosen = match strategy {
            Strategy::Random => {
                // One stream per ply, so a journal replay reproduces the choice.
                let mut rng = ChaCha8Rng::seed_from_u64(guard.seed);
                rng.set_stream(guard.history.len() as u64);
                legal[rng.gen_range(0..legal.len())]
            }
            Strategy::GreedyMonovariant => greedy_choice(&legal),
            Strategy::Optimal => solution
                .as_ref()
                .and_then(|s| s.winning_move(&guard.state))
                .unwrap_or(legal[0]),
        };
        guard.play(chosen, turn)?;
        Ok(EngineMoveView {
            strategy,
            chosen: chosen.to_string(),
            session: guard.view(),
        })
    }
}

/// Most negative monovariant change; ties go to the lexicographically
/// smallest serialized move.
fn greedy_choice(legal: &[MoveDescriptor]) -> MoveDescriptor {
    *legal
        .iter()
        .min_by(|a, b| {
            a.monovariant_delta()
                .total_cmp(&b.monovariant_delta())
                .then_with(|| a.to_string().cmp(&b.to_string()))
        })
        .expect("caller checked for legal moves")
}
