//! Shared fixtures: paths and a rule-based chat backend standing in for the
//! hosted models when cassettes are (re)recorded.

#![allow(dead_code)]

pub mod gen;
pub mod oracle;

use std::path::PathBuf;
use std::sync::Arc;

use ontoekg::extraction::extraction_shape;
use ontoekg::llm::{ChatBackend, ChatRequest, FnBackend};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn corpus(sector: &str) -> PathBuf {
    fixtures().join("corpus").join(sector)
}

pub fn cassette(sector: &str) -> PathBuf {
    fixtures().join("cassettes").join(format!("{sector}.jsonl"))
}

pub fn golden(sector: &str) -> PathBuf {
    fixtures().join("golden").join(format!("{sector}.ttl"))
}

pub const SECTORS: [&str; 3] = ["data", "finance", "logistics"];

const DATA: &str = r#"{"classes":[
 {"label":"Employee","description":"A person employed by the company who handles company data."},
 {"label":"Contractor","description":"A person engaged under contract who handles company data."},
 {"label":"DataAsset","description":"A collection of records held in a company system."},
 {"label":"DataOwner","description":"The person accountable for classifying a data asset and approving access to it."},
 {"label":"AccessRequest","description":"A request for access to a data asset, submitted by an employee."},
 {"label":"Policy","description":"A rule set governing how company data is handled."},
 {"label":"GovernanceStandard","description":"A mandatory rule set published by the security office that specifies controls."},
 {"label":"SecurityOffice","description":"The organisational unit that publishes governance standards."},
 {"label":"SecurityIncident","description":"An event that compromises the security of company data."},
 {"label":"IncidentReport","description":"A report describing a security incident and the affected data asset."},
 {"label":"DataBreach","description":"A security incident in which confidential data is disclosed to an unauthorised party."}
],"properties":[
 {"label":"ownedBy","description":"Links a data asset to its owner.","domain":"DataAsset","range":"DataOwner"},
 {"label":"submittedBy","description":"The employee who submitted the request.","domain":"AccessRequest","range":"Employee"},
 {"label":"concerns","description":"The data asset an access request is for.","domain":"AccessRequest","range":"DataAsset"},
 {"label":"approvedBy","description":"The owner who approved the request.","domain":"AccessRequest","range":"DataOwner"},
 {"label":"expiresOn","description":"The date on which granted access ends.","domain":"AccessRequest","range":"date"},
 {"label":"publishedBy","description":"The unit that publishes a standard.","domain":"GovernanceStandard","range":"SecurityOffice"},
 {"label":"specifies","description":"A control required by a standard.","domain":"GovernanceStandard","range":"Control"},
 {"label":"reports","description":"An employee reporting an incident.","domain":"Employee","range":"SecurityIncident"},
 {"label":"describes","description":"The data asset affected by an incident.","domain":"IncidentReport","range":"DataAsset"},
 {"label":"hasSeverity","description":"The severity of the incident.","domain":"IncidentReport","range":"string"},
 {"label":"isTypeOf","description":"Marks a breach as a kind of incident.","domain":"DataBreach","range":"SecurityIncident"}
]}"#;

const FINANCE: &str = r#"{"classes":[
 {"label":"Employee","description":"A person employed by the company."},
 {"label":"ExpenseClaim","description":"A request by an employee to be reimbursed for business expenses."},
 {"label":"ExpenseItem","description":"A single expense listed on a claim."},
 {"label":"Receipt","description":"A document issued by a merchant as proof of payment."},
 {"label":"Merchant","description":"A business that sells goods or services to an employee."},
 {"label":"LineManager","description":"An employee who supervises other employees and approves their claims."},
 {"label":"FinanceController","description":"An employee who reviews claims above the approval limit."},
 {"label":"BankAccount","description":"The account into which approved claims are paid."},
 {"label":"PaymentRun","description":"A scheduled batch of payments."},
 {"label":"CorporateCardHolder","description":"An employee who holds a company payment card."}
],"properties":[
 {"label":"submits","description":"An employee submitting a claim.","domain":"Employee","range":"ExpenseClaim"},
 {"label":"lists","description":"The items on a claim.","domain":"ExpenseClaim","range":"ExpenseItem"},
 {"label":"hasAmount","description":"The amount of an item.","domain":"ExpenseItem","range":"decimal"},
 {"label":"hasCurrency","description":"The currency of an item.","domain":"ExpenseItem","range":"string"},
 {"label":"hasReceipt","description":"The receipt supporting an item.","domain":"ExpenseItem","range":"Receipt"},
 {"label":"issuedBy","description":"The merchant that issued a receipt.","domain":"Receipt","range":"Merchant"},
 {"label":"approvedBy","description":"The manager approving a claim.","domain":"ExpenseClaim","range":"LineManager"},
 {"label":"paidInto","description":"The account a claim is paid into.","domain":"ExpenseClaim","range":"BankAccount"},
 {"label":"paidDuring","description":"The payment run that pays a claim.","domain":"ExpenseClaim","range":"PaymentRun"}
]}"#;

/// First answer for the finance document: misses required fields, so the
/// cassette also exercises a repair round trip.
const FINANCE_MALFORMED: &str = r#"{"classes":[{"label":"ExpenseClaim"}]}"#;

const LOGISTICS: &str = r#"{"classes":[
 {"label":"Vehicle","description":"A motor vehicle in the delivery fleet."},
 {"label":"Van","description":"A light vehicle used for deliveries."},
 {"label":"Truck","description":"A heavy vehicle with a maximum payload."},
 {"label":"Depot","description":"A regional site from which vehicles operate."},
 {"label":"Employee","description":"A person employed by the company."},
 {"label":"Driver","description":"An employee who holds a valid licence and operates a vehicle."},
 {"label":"MaintenanceTechnician","description":"An employee who inspects vehicles."},
 {"label":"Licence","description":"A permit to drive a class of vehicle."},
 {"label":"Route","description":"A planned sequence of delivery stops starting at a depot."},
 {"label":"DeliveryStop","description":"A location visited on a route."},
 {"label":"Shipment","description":"Goods delivered to a customer."},
 {"label":"Customer","description":"A party receiving shipments."}
],"properties":[
 {"label":"assignedTo","description":"The depot a vehicle belongs to.","domain":"Vehicle","range":"Depot"},
 {"label":"operatedBy","description":"The driver operating a vehicle.","domain":"Vehicle","range":"Driver"},
 {"label":"holds","description":"A licence held by a driver.","domain":"Driver","range":"Licence"},
 {"label":"startsAt","description":"The depot a route starts from.","domain":"Route","range":"Depot"},
 {"label":"visits","description":"A stop on a route.","domain":"Route","range":"DeliveryStop"},
 {"label":"scheduledFor","description":"The date a route runs.","domain":"Route","range":"date"},
 {"label":"loadedOnto","description":"The vehicle carrying a shipment.","domain":"Shipment","range":"Vehicle"},
 {"label":"deliveredTo","description":"The customer receiving a shipment.","domain":"Shipment","range":"Customer"},
 {"label":"maxPayload","description":"The maximum payload of a truck in tonnes.","domain":"Truck","range":"decimal"},
 {"label":"inspectedBy","description":"The technician inspecting a vehicle.","domain":"Vehicle","range":"MaintenanceTechnician"}
]}"#;

/// Subsumptions the oracle affirms. Policy and GovernanceStandard are
/// affirmed in both directions on purpose.
const HOLDS: &[(&str, &str)] = &[
    ("DataOwner", "Employee"),
    ("DataBreach", "SecurityIncident"),
    ("Policy", "GovernanceStandard"),
    ("GovernanceStandard", "Policy"),
    ("LineManager", "Employee"),
    ("FinanceController", "Employee"),
    ("CorporateCardHolder", "Employee"),
    ("Driver", "Employee"),
    ("MaintenanceTechnician", "Employee"),
    ("Van", "Vehicle"),
    ("Truck", "Vehicle"),
];

fn class_line<'a>(content: &'a str, tag: &str) -> &'a str {
    content
        .lines()
        .find_map(|l| l.strip_prefix(tag))
        .unwrap_or_default()
}

/// Deterministic answers as a function of the request alone.
pub fn oracle_answer(r: &ChatRequest) -> String {
    if r.response_schema == extraction_shape() {
        let text = &r.user_content;
        if text.contains("Information Security") {
            DATA.to_string()
        } else if text.contains("Travel and Expense") {
            if text.contains("could not be used") {
                FINANCE.to_string()
            } else {
                FINANCE_MALFORMED.to_string()
            }
        } else if text.contains("Fleet Operations") {
            LOGISTICS.to_string()
        } else {
            r#"{"classes":[],"properties":[]}"#.to_string()
        }
    } else {
        let a = class_line(&r.user_content, "Class A: ");
        let b = class_line(&r.user_content, "Class B: ");
        let holds = HOLDS.contains(&(a, b));
        let rationale = if holds {
            format!("Every {a} is necessarily a {b}.")
        } else {
            format!("A {a} is not necessarily a {b}.")
        };
        serde_json::json!({"holds": holds, "rationale": rationale}).to_string()
    }
}

pub fn oracle_backend() -> Arc<dyn ChatBackend> {
    Arc::new(FnBackend::new(|r: &ChatRequest| Ok(oracle_answer(r))))
}
