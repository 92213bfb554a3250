//! The `ethiplan` command: plan, evaluate and explain from the shell, or
//! start the HTTP service.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ethiplan::explain::{plan_report, to_payload_text};
use ethiplan::{
    evaluate, find_plan, parse_model, reasons_for, solve_explanation_problem, ExplainError, ExplanationProblem,
    Objective, Plan, PlanError, PlanningModel, PrincipleId, SearchBudget, SourceDocument, Suggestion,
};
use ethiplan_service::ServiceConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NO_PLAN: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "ethiplan", version, about = "Check plans against ethical principles and explain suggested changes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print a plan for the problem.
    Plan(Inputs),
    /// Judge the plan under a principle and list the reasons.
    Evaluate {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_parser = parse_principle)]
        principle: PrincipleId,
    },
    /// Contrast the plan with the plan that follows a suggestion.
    Explain {
        #[command(flatten)]
        inputs: Inputs,
        /// e.g. "replace lie_frank with beg_frank"
        #[arg(long = "suggest", value_parser = parse_suggestion)]
        suggestion: Suggestion,
        #[arg(long, value_parser = parse_principle)]
        principle: PrincipleId,
    },
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Args, Debug)]
struct Inputs {
    #[arg(short = 'd', long)]
    domain: PathBuf,
    #[arg(short = 'p', long)]
    problem: PathBuf,
    #[arg(long, value_parser = parse_objective, default_value = "min-cost")]
    objective: Objective,
    #[arg(long, default_value_t = SearchBudget::default().max_depth)]
    max_depth: usize,
    #[arg(long, default_value_t = SearchBudget::default().max_expansions)]
    max_expansions: usize,
    /// Use these steps (separated by `;` or `,`) instead of planning.
    #[arg(long)]
    plan: Option<String>,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct ServeArgs {
    /// TOML file with `listen` and `snapshot` keys.
    #[arg(long, env = "ETHIPLAN_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long)]
    listen: Option<String>,
    #[arg(long)]
    snapshot: Option<PathBuf>,
}

fn parse_principle(s: &str) -> Result<PrincipleId, String> {
    s.parse().map_err(|e: ethiplan::ethics::UnknownPrinciple| e.to_string())
}

fn parse_suggestion(s: &str) -> Result<Suggestion, String> {
    s.parse().map_err(|e: ethiplan::compile::SuggestionSyntaxError| e.to_string())
}

fn parse_objective(s: &str) -> Result<Objective, String> {
    match s {
        "min-cost" => Ok(Objective::MinCost),
        "max-utility" => Ok(Objective::MaxUtility),
        _ => Err(format!("unknown objective `{s}` (expected min-cost or max-utility)")),
    }
}

/// A failed invocation: exit code and the message for stderr.
struct Failure(i32, String);

impl Failure {
    fn usage(msg: impl ToString) -> Self {
        Failure(EXIT_USAGE, msg.to_string())
    }
}

impl From<PlanError> for Failure {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::InvalidBudget => Failure::usage(e),
            _ => Failure(EXIT_NO_PLAN, e.to_string()),
        }
    }
}

impl From<ExplainError> for Failure {
    fn from(e: ExplainError) -> Self {
        let code = match &e {
            ExplainError::Compile(_) | ExplainError::InvalidProblem(_) => EXIT_USAGE,
            ExplainError::NoPlanFound { .. } | ExplainError::BudgetExceeded | ExplainError::ValidationFailed(_) => {
                EXIT_NO_PLAN
            }
            ExplainError::Ethics(ethiplan::EthicsError::Search(_)) => EXIT_NO_PLAN,
            ExplainError::Ethics(_) | ExplainError::Reasons(_) => EXIT_INTERNAL,
        };
        Failure(code, e.to_string())
    }
}

impl Inputs {
    fn budget(&self) -> Result<SearchBudget, Failure> {
        Ok(SearchBudget::new(self.max_depth, self.max_expansions)?)
    }

    fn model(&self) -> Result<PlanningModel, Failure> {
        let read = |p: &PathBuf| {
            SourceDocument::from_path(p).map_err(|e| Failure::usage(format!("cannot read {}: {e}", p.display())))
        };
        parse_model(&read(&self.domain)?, &read(&self.problem)?).map_err(Failure::usage)
    }

    /// The imported plan if given, otherwise one from the planner.
    fn plan(&self, model: &PlanningModel) -> Result<Plan, Failure> {
        match &self.plan {
            Some(text) => {
                let steps: Vec<&str> = text.split([';', ',']).map(str::trim).filter(|s| !s.is_empty()).collect();
                let plan = model.execute(&steps).map_err(Failure::usage)?;
                if !model.satisfies_goal(&plan) {
                    return Err(Failure::usage("the given plan does not achieve the goal"));
                }
                Ok(plan)
            }
            None => Ok(find_plan(model, self.objective, self.budget()?)?),
        }
    }
}

fn plan_json(plan: &Plan) -> String {
    to_payload_text(&serde_json::json!({ "steps": plan.steps, "cost": plan.total_cost }))
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure(EXIT_INTERNAL, e.to_string());
    match cmd {
        Command::Plan(inputs) => {
            let model = inputs.model()?;
            let plan = inputs.plan(&model)?;
            if inputs.json {
                write!(out, "{}", plan_json(&plan)).map_err(io)?;
            } else {
                writeln!(out, "{plan}").map_err(io)?;
            }
        }
        Command::Evaluate { inputs, principle } => {
            let model = inputs.model()?;
            let plan = inputs.plan(&model)?;
            let verdict = evaluate(principle, &model, &plan, inputs.budget()?)
                .map_err(|e| Failure::from(ExplainError::from(e)))?;
            let reasons = reasons_for(&verdict).map_err(|e| Failure::from(ExplainError::from(e)))?;
            if inputs.json {
                write!(out, "{}", to_payload_text(&plan_report(&plan.steps, &verdict, &reasons))).map_err(io)?;
            } else {
                writeln!(out, "{plan}").map_err(io)?;
                writeln!(out, "{} under {}", verdict.label(), principle.name()).map_err(io)?;
                writeln!(out, "formula: {}", verdict.formula.formula).map_err(io)?;
                if let Some(note) = &verdict.bound_note {
                    writeln!(out, "note: {note}").map_err(io)?;
                }
                for l in &reasons.sufficient_and_necessary {
                    writeln!(out, "sufficient and necessary: {l}").map_err(io)?;
                }
                for t in &reasons.sufficient {
                    writeln!(out, "sufficient: {}", t.term_string()).map_err(io)?;
                }
                for c in &reasons.necessary {
                    writeln!(out, "necessary: {}", c.clause_string()).map_err(io)?;
                }
            }
        }
        Command::Explain {
            inputs,
            suggestion,
            principle,
        } => {
            let model = inputs.model()?;
            let plan = inputs.plan(&model)?;
            let problem = ExplanationProblem {
                model,
                plan,
                suggestion,
                principle,
            };
            let e = explain_with(&problem, inputs.objective, inputs.budget()?)?;
            if inputs.json {
                write!(out, "{}", e.payload_text()).map_err(io)?;
            } else {
                writeln!(out, "{}", e.nl).map_err(io)?;
            }
        }
        Command::Serve(args) => serve(args)?,
    }
    Ok(())
}

fn explain_with(
    problem: &ExplanationProblem,
    objective: Objective,
    budget: SearchBudget,
) -> Result<ethiplan::ContrastiveExplanation, Failure> {
    if objective == Objective::MinCost {
        return Ok(solve_explanation_problem(problem, budget)?);
    }
    let planner = ethiplan::Planner { objective, budget };
    Ok(ethiplan::Explainer::new(&planner, budget)
        .solve(problem)
        .map(|d| d.explanation)?)
}

fn serve(args: ServeArgs) -> Result<(), Failure> {
    let mut config = match &args.config {
        Some(path) => ServiceConfig::from_file(path).map_err(Failure::usage)?,
        None => ServiceConfig::default(),
    };
    config.apply_env(|k| std::env::var(k).ok());
    if let Some(listen) = args.listen {
        config.listen = listen;
    }
    if let Some(path) = args.snapshot {
        config.snapshot = Some(path);
    }
    config.listen_addr().map_err(Failure::usage)?;
    let _ = tracing_subscriber::fmt().try_init();
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure(EXIT_INTERNAL, e.to_string()))?;
    runtime
        .block_on(ethiplan_service::serve(config))
        .map_err(|e| Failure(EXIT_INTERNAL, e.to_string()))
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}
