// Coefficient tables for the diagonal-norm SBP families.
//
// Orders 2 and 4: classical closures of Kreiss-Scherer / Mattsson-Nordstrom
// type; the variable-coefficient remainder terms live in sbp.cpp.
//
// Order 6: first-derivative closure with the standard 6th-order diagonal
// norm; the variable-coefficient operator is compatible,
//   A^(b) = D1^T H B D1 + sum_k b_k R_k,
// where R_k for the six boundary nodes are positive semidefinite matrices
// given below as sums of rank-one factors, and interior R_k are built from
// fourth, fifth and sixth differences.  The boundary factors were computed
// offline with a semidefinite program followed by a Newton polish of the
// accuracy conditions; verify_operators checks the resulting operator.
#include "dvw/sbp.hpp"

#include <atomic>

namespace dvw::tables {

namespace {

Closure make_order2() {
    Closure c;
    c.omega = {0.5};
    c.d1 = {{-1.0, 1.0}};
    c.d1_interior = {-0.5, 0.0, 0.5};
    c.dbound = {-1.5, 2.0, -0.5};
    return c;
}

Closure make_order4() {
    Closure c;
    c.omega = {17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0};
    c.d1 = {
        {-24.0 / 17.0, 59.0 / 34.0, -4.0 / 17.0, -3.0 / 34.0},
        {-0.5, 0.0, 0.5},
        {4.0 / 43.0, -59.0 / 86.0, 0.0, 59.0 / 86.0, -4.0 / 43.0},
        {3.0 / 98.0, 0.0, -59.0 / 98.0, 0.0, 32.0 / 49.0, -4.0 / 49.0},
    };
    c.d1_interior = {1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0};
    c.dbound = {-11.0 / 6.0, 3.0, -1.5, 1.0 / 3.0};
    return c;
}

Closure make_order6() {
    Closure c;
    c.omega = {13649.0 / 43200.0, 12013.0 / 8640.0, 2711.0 / 4320.0,
               5359.0 / 4320.0,   7877.0 / 8640.0,  43801.0 / 43200.0};
    c.d1 = {
        {-1.582533518939116418785258993332844897062, 2.033426786468126253898161347360808173712,
         -0.1417052898146741610733887894481170575600, -0.4501096599735708523162117824920488989702,
         0.1042956382142412661862395105494407610836, 0.03662604404499391209045870736276191879693},
        {-0.4620701275035953590186631853846278325646, 0.0,
         0.2873679417026202568532985205129449923126, 0.2585974499280928196267362923074433487080,
         -0.06894808744606961472005221923058251153103, -0.01494717668104810274131940820517799692506},
        {0.07134398748360337973038301686379010397038, -0.6366933020423417826592908754928085932593, 0.0,
         0.6067199374180168986519150843189505198519, -0.02338660408468356531858175098561718651857,
         -0.01798401877459493040442547470431484404443},
        {0.1146397975178068401430112823144985150596, -0.2898424301162697370942324201800071793273,
         -0.3069262456316931913128086944558079603132, 0.0,
         0.5203848121857539166740071338174418292578, -0.05169127637022742348368508279860701098408,
         0.01343534241462959507370778130248180630715},
        {-0.03614399304268576976452921364705641609825, 0.1051508663818248421520867474440761344449,
         0.01609777419666805778308369351834662756172, -0.7080721616106272031118456849378369336023, 0.0,
         0.7692160858661111736140494493705980473867, -0.1645296432652024882569506157166433921544,
         0.01828107147391138758410562396851593246160},
        {-0.01141318406360863692889821914555232596651, 0.02049729840293952857599941220163960606616,
         0.01113095018331244864875173213474522093204, 0.06324365883611076515355091406993789453750,
         -0.6916640154753724474963890679085181638850, 0.0,
         0.7397091390607520376247117645715851236273, -0.1479418278121504075249423529143170247255,
         0.01643798086801671194721581699047966941394},
    };
    c.d1_interior = {-1.0 / 60.0, 3.0 / 20.0, -0.75, 0.0, 0.75, -3.0 / 20.0, 1.0 / 60.0};
    c.dbound = {-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -0.25};
    return c;
}

std::atomic<double> g_perturbation{0.0};

}  // namespace

const Closure& closure(int order) {
    static const Closure c2 = make_order2();
    static const Closure c4 = make_order4();
    static const Closure c6 = make_order6();
    switch (order) {
        case 2: return c2;
        case 4: return c4;
        case 6: return c6;
        default: throw UnsupportedOrder("unsupported SBP order " + std::to_string(order) +
                                        " (supported: 2, 4, 6)");
    }
}

const std::vector<std::vector<std::vector<double>>>& order6_factors() {
    static const std::vector<std::vector<std::vector<double>>> f = {
    // element 0
    {
        {0.0051615203381476195, -0.016321045826584814, 0.013180824062245359, 0.0070946280437925429, -0.014754868881065589, 0.006648179052099871, -0.0018545723167115048, 0.0011811564900319784, -0.00033582096195546723},
        {0.0088542022915236128, -0.027786583724742561, 0.013147082843329473, 0.03096472584442788, -6.5850816704706848e-05, -0.095630409987062001, 0.11603342782564535, -0.054945880964340686, 0.0094292866879236402},
        {-0.061228668322630526, 0.34411002061049684, -0.79478766095176134, 0.95172062282319037, -0.59508109491502337, 0.14382607513431217, 0.031709310341509672, -0.023390412523678128, 0.0031218078035844398},
    },
    // element 1
    {
        {1.7403467004797439e-05, -6.4029896412627524e-05, 7.8716753486723871e-05, -1.9944905184032124e-05, -3.6217388497667761e-05, 3.6473899051254594e-05, -1.6170468232413958e-05, 4.1627925985861585e-06, -3.9425381462066831e-07},
        {2.3918317729259519e-05, -8.1710442964737714e-05, 7.2737581222773813e-05, 2.8622575851574017e-05, -3.9159504954068517e-05, -6.4271741252410616e-05, 9.6567430604845426e-05, -4.2621888155555486e-05, 5.917671918319534e-06},
        {1.4174886497227007e-05, -9.9982907463308835e-05, 0.00015735777196166978, 5.1217936398747514e-06, -7.4134174726165792e-05, -0.00019620462623285125, 0.00032458384464534968, -0.00014728999133821149, 1.6373403016416169e-05},
        {0.00049004107613921329, -0.0017190981936761633, 0.0018268107547487881, -4.8691582628634423e-05, -0.00079242799133919949, -0.00015343611273057586, 0.00067955243374664053, -0.00033312998539552932, 5.0379601135459966e-05},
        {-0.00017649421487109999, -9.5587524253532247e-05, 0.0025352414510728099, -0.0053355953128811874, 0.0039733322928834454, -1.2976090380656378e-05, -0.0015245594864790588, 0.00074231227555166836, -0.00010567339064239025},
    },
    // element 2
    {
        {5.6811172233376475e-05, -0.00021160469454498769, 0.00028292482915970578, -0.0001481733040128728, 5.3772329804174404e-06, 2.654835118567091e-05, -2.1017415586310647e-05, 1.0940558947357242e-05, -1.8067303623568084e-06},
        {-6.9558176575336154e-05, 0.00016987172472643011, -3.1220875828475258e-05, -0.00017380756826423715, 3.4758272484716588e-05, 0.00017302377640308358, -0.00014093860469501372, 4.7499196352333441e-05, -9.6277446035014167e-06},
        {-0.00075865931977489023, 0.0025550414451032625, -0.0026804678570395975, 0.00036638793257878598, 0.00076307031251098294, -4.8276095818749836e-05, -0.00030385227996626655, 0.00013510343804481201, -2.834757563833802e-05},
        {0.010111854677905168, -0.016455354215193372, -0.041919565769185291, 0.12340503017183253, -0.094704539809004479, -0.007167291557274893, 0.046902805895435433, -0.024700692043552856, 0.0045277526490377891},
    },
    // element 3
    {
        {0.048437973461571103, -0.14446485963658215, 0.07723479851045445, 0.15491925664499362, -0.18858451632062098, 0.0041931022584124865, 0.088712042521719658, -0.049920171060883395, 0.0094723736209353128},
        {-0.17218539686324336, 0.76167708921988031, -1.3001430560371434, 1.0111309324371036, -0.2376801285039713, -0.17404358811129067, 0.16502029007756142, -0.06624207740147306, 0.012465935182576791},
    },
    // element 4
    {
        {-0.00024460608525487469, 0.00055750124904375834, -0.00013137896278236173, -0.00031635127036523582, 8.5062087191761562e-05, -0.00036373799390966555, 0.00085648505814991179, -0.00053763436631005417, 9.4660284236760124e-05},
        {0.071427357889444806, -0.21634699036046656, 0.12495384373160683, 0.21704101431158115, -0.27453374999135299, 0.00086060300612121133, 0.14322366850294785, -0.082812210598490019, 0.016186463508607706},
        {-0.044822497725853692, 0.2853365763151503, -0.62335152037414077, 0.55706031500742836, -0.14449263534854567, -0.0023224994290385972, -0.083445200358615329, 0.067859935207330954, -0.011822473293715387},
    },
    // element 5
    {
        {-3.7188174705652821e-05, 6.5239958629555243e-05, 6.5350138822035589e-05, -0.00013384669795034069, -9.9666275928353412e-05, 0.00022930862303699538, -6.0477391831872304e-05, -5.0347503870975221e-05, 2.1627323798608235e-05},
        {-0.0094103177317238652, 0.035474180858705066, -0.0561358922491106, 0.061265356279815116, -0.058461284791624775, 0.029290884126975614, 0.010810975742204371, -0.018197616761035106, 0.0053637145257941603},
        {0.078318101176556229, -0.19988693413572928, 0.018600800374869608, 0.26636654818710931, -0.0012042494249816411, -0.4206354627969785, 0.33117318135475232, -0.066396790265730518, -0.0063351944698677078},
        {-0.16290840779201846, 0.50128426121064817, -0.40759495885651131, -0.17015333387276763, 0.42940111414411053, -0.28625024673315369, 0.13226770966421841, -0.032775279340904379, -0.0032708584236216783},
    }
};
    return f;
}

void set_perturbation(double delta) { g_perturbation.store(delta); }
double perturbation() { return g_perturbation.load(); }

}  // namespace dvw::tables
